use lambda_zeno::collective::{n_tot_h_closed_form, n_tot_h_saturation, Horizon};
use lambda_zeno::exact::{build_h1, scatter, scatter_in, LossPolicy};
use lambda_zeno::protocol::{
    run_protocol, sweep, DriveMode, Engine, InitialState, PhotonEvent, PreludeOutcome,
    ProtocolSpec, ProtocolTrace, TraceRow,
};
use lambda_zeno::validation::{run_validation, Suite, ValidateOptions, ValidationReport};
use lambda_zeno::{
    dark_state, GroundStateVector, MeasurementBasis, PhysicalParams, PolarizationLabel, C64,
};

use crate::config::{
    linspace, logspace, CliError, DetuningUnit, FigurePart, InitialKind, PreludeMode, RowSelect,
    Settings,
};
use crate::output::{format_float, Cell, Table};

const TRACE_COLUMNS: [&str; 7] = ["n_v", "r_vh", "n_tot_h", "sx", "sy", "sz", "loss"];

fn trace_cells(r: &TraceRow) -> Vec<Cell> {
    vec![
        r.n_v.into(),
        r.r_vh.into(),
        r.n_tot_h.into(),
        r.sx.into(),
        r.sy.into(),
        r.sz.into(),
        r.loss.into(),
    ]
}

fn missing_trace_cells() -> Vec<Cell> {
    let mut cells = vec![Cell::Text(String::new())];
    cells.extend(std::iter::repeat_n(
        Cell::Float(f64::NAN),
        TRACE_COLUMNS.len() - 1,
    ));
    cells
}

fn columns(prefix: &[&'static str], suffix: &[&'static str]) -> Vec<&'static str> {
    prefix
        .iter()
        .chain(TRACE_COLUMNS.iter())
        .chain(suffix.iter())
        .copied()
        .collect()
}

fn initial_state(s: &Settings, n_at: usize) -> Result<InitialState, CliError> {
    if let Some(amps) = &s.amplitudes {
        return Ok(InitialState::Custom {
            amplitudes: amps.iter().map(|[re, im]| C64::new(*re, *im)).collect(),
        });
    }
    let dim = 1usize << n_at.min(20);
    let basis_state = |k: usize| {
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[k] = C64::new(1.0, 0.0);
        InitialState::Custom { amplitudes }
    };
    Ok(match s.initial.unwrap_or(InitialKind::Dark) {
        InitialKind::Dark => InitialState::Dark,
        InitialKind::AllPlus => basis_state(0),
        InitialKind::AllMinus => basis_state(dim - 1),
    })
}

fn initial_vector(s: &Settings, n_at: usize) -> Result<GroundStateVector, CliError> {
    Ok(match initial_state(s, n_at)? {
        InitialState::Dark => dark_state(n_at)?,
        InitialState::Custom { amplitudes } => {
            GroundStateVector::from_vec(n_at, amplitudes)?.normalized()?
        }
    })
}

fn protocol_spec(s: &Settings, params: PhysicalParams, phi: f64) -> Result<ProtocolSpec, CliError> {
    let prelude = match s.prelude.unwrap_or(PreludeMode::Kick) {
        PreludeMode::Kick => vec![PhotonEvent::kick()],
        PreludeMode::Unconditioned => vec![PhotonEvent {
            outcome: PreludeOutcome::Unconditioned,
            ..PhotonEvent::kick()
        }],
        PreludeMode::None => Vec::new(),
    };
    Ok(ProtocolSpec {
        params,
        initial: initial_state(s, params.n_at)?,
        prelude,
        n_v: s.n_v.unwrap_or(0),
        field_phase: phi,
        drive: s.drive.unwrap_or_default(),
        engine: s.engine.unwrap_or_default(),
        loss_policy: s.loss_policy(),
    })
}

fn fill_protocol_defaults(s: &mut Settings, n_v: usize, engine: Engine, policy: LossPolicy) {
    s.n_v.get_or_insert(n_v);
    s.field_phase.get_or_insert(0.0);
    s.prelude.get_or_insert(PreludeMode::Kick);
    s.drive.get_or_insert(DriveMode::Photons);
    s.engine.get_or_insert(engine);
    s.loss_policy.get_or_insert(policy);
    if s.amplitudes.is_none() {
        s.initial.get_or_insert(InitialKind::Dark);
    }
}

fn prelude_notes(table: &mut Table, trace: &ProtocolTrace) {
    for (k, p) in trace.prelude.iter().enumerate() {
        let outcome = match p.outcome {
            PreludeOutcome::Heralded(out) => format!("{}->{}", p.pol, out),
            PreludeOutcome::Unconditioned => format!("{}->any", p.pol),
        };
        table.note(
            format!("prelude_{k}"),
            format!(
                "{outcome} probability={} loss={}",
                format_float(p.probability),
                format_float(p.loss)
            ),
        );
    }
}

pub fn single(s: &mut Settings) -> Result<Table, CliError> {
    s.default_physics(1, None)?;
    let pol = *s.in_pol.get_or_insert(PolarizationLabel::Plus);
    let basis = *s.basis.get_or_insert(MeasurementBasis::of(pol));
    if s.amplitudes.is_none() {
        s.initial.get_or_insert(InitialKind::Dark);
    }
    let params = s.params()?;
    let ground = initial_vector(s, params.n_at)?;
    let out = scatter(&ground, pol, basis, &params)?;

    let mut table = Table::new(
        "single",
        &["out_pol", "probability", "loss", "basis_state", "re", "im"],
    );
    table.note("total_reflection", out.total_reflection().to_string());
    for b in &out.branches {
        for (k, a) in b.state.amplitudes().iter().enumerate() {
            table.push(vec![
                b.out_pol.as_str().into(),
                b.probability.into(),
                out.loss.into(),
                k.into(),
                a.re.into(),
                a.im.into(),
            ]);
        }
    }
    Ok(table)
}

fn verify_dark(params: &PhysicalParams) -> Result<(), CliError> {
    let ws = build_h1(params)?;
    let dark = dark_state(params.n_at)?;
    let mut psi = dark.clone();
    for k in 1..=5 {
        let out = scatter_in(&ws, &psi, PolarizationLabel::V, MeasurementBasis::Linear)?;
        let flipped = out.probability(PolarizationLabel::H);
        let kept = out
            .branch(PolarizationLabel::V)
            .expect("linear basis")
            .state
            .clone();
        let drift = (kept.amplitudes() - dark.amplitudes()).norm();
        if flipped > 1e-12 || drift > 1e-10 {
            return Err(CliError::Failure(format!(
                "dark state check failed at photon {k}: R_VH = {flipped:e}, drift = {drift:e}"
            )));
        }
        psi = kept;
    }
    Ok(())
}

pub fn protocol(s: &mut Settings) -> Result<Table, CliError> {
    s.default_physics(4, None)?;
    fill_protocol_defaults(s, 20, Engine::Exact, LossPolicy::Discard);
    let params = s.params()?;
    let spec = protocol_spec(s, params, s.field_phase.unwrap_or(0.0))?;
    let mut table = Table::new("protocol", &TRACE_COLUMNS);
    if s.verify_dark.unwrap_or(false) {
        verify_dark(&params)?;
        table.note("verify_dark", "ok");
    }
    let trace = run_protocol(&spec)?;
    prelude_notes(&mut table, &trace);
    for r in &trace.rows {
        table.push(trace_cells(r));
    }
    Ok(table)
}

fn grid_or(
    min: Option<f64>,
    max: Option<f64>,
    steps: Option<usize>,
    point: f64,
) -> Result<Vec<f64>, CliError> {
    if min.is_none() && max.is_none() && steps.is_none() {
        return Ok(vec![point]);
    }
    let lo = min.unwrap_or(point);
    linspace(lo, max.unwrap_or(lo), steps.unwrap_or(1))
}

fn push_trace_point(
    table: &mut Table,
    prefix: Vec<Cell>,
    result: &Result<ProtocolTrace, CliError>,
    rows: RowSelect,
) {
    match result {
        Ok(trace) => {
            let selected: Vec<&TraceRow> = match rows {
                RowSelect::Final => vec![trace.last()],
                RowSelect::All => trace.rows.iter().collect(),
            };
            for r in selected {
                let mut row = prefix.clone();
                row.extend(trace_cells(r));
                row.push("".into());
                table.push(row);
            }
        }
        Err(e) => {
            let mut row = prefix;
            row.extend(missing_trace_cells());
            row.push(e.to_string().into());
            table.push(row);
        }
    }
}

pub fn sweep_cmd(s: &mut Settings) -> Result<Table, CliError> {
    s.default_physics(4, None)?;
    fill_protocol_defaults(s, 20, Engine::Exact, LossPolicy::Discard);
    let rows = *s.rows.get_or_insert(RowSelect::Final);
    let n_list = s
        .n_at_list
        .clone()
        .unwrap_or_else(|| vec![s.n_at.unwrap_or(4)]);
    let detunings: Vec<Option<f64>> = match s.detuning {
        Some(d) => grid_or(s.detuning_min, s.detuning_max, s.detuning_steps, d)?
            .into_iter()
            .map(Some)
            .collect(),
        None => vec![None],
    };
    let phis = grid_or(
        s.phi_min,
        s.phi_max,
        s.phi_steps,
        s.field_phase.unwrap_or(0.0),
    )?;

    let mut grid = Vec::new();
    for &n in &n_list {
        for &d in &detunings {
            for &phi in &phis {
                grid.push((n, d, phi));
            }
        }
    }
    let settings = s.clone();
    let results = sweep(&grid, |&(n, d, phi)| {
        Ok(settings
            .params_at(n, d)
            .and_then(|p| Ok((p, run_protocol(&protocol_spec(&settings, p, phi)?)?))))
    });

    let mut table = Table::new(
        "sweep",
        &columns(&["n_at", "detuning", "omega", "phi"], &["error"]),
    );
    for (&(n, d, phi), res) in grid.iter().zip(results) {
        let res = res.expect("errors are carried inside");
        let omega = res.as_ref().map_or(f64::NAN, |(p, _)| p.omega);
        let detuning = d.unwrap_or_else(|| res.as_ref().map_or(f64::NAN, |(p, _)| p.detuning()));
        let prefix = vec![n.into(), detuning.into(), omega.into(), phi.into()];
        push_trace_point(&mut table, prefix, &res.map(|(_, t)| t), rows);
    }
    Ok(table)
}

pub fn fig3a(s: &mut Settings) -> Result<Table, CliError> {
    s.omega0.get_or_insert(0.0);
    s.gamma1d.get_or_insert(1.0);
    s.detuning.get_or_insert(0.0);
    s.detuning_unit.get_or_insert(DetuningUnit::Gamma1d);
    let n_max = *s.n_at_max.get_or_insert(50);
    let c1 = logspace(
        *s.c1_min.get_or_insert(0.01),
        *s.c1_max.get_or_insert(100.0),
        *s.c1_steps.get_or_insert(41),
    )?;
    let g1 = s.gamma1d.unwrap_or(1.0);
    let mut grid = Vec::new();
    for n in 1..=n_max {
        for &c in &c1 {
            grid.push((n, c));
        }
    }
    let settings = s.clone();
    let results = sweep(&grid, |&(n, c)| {
        let mut local = settings.clone();
        local.gamma = Some(g1 / c);
        local.c_n = None;
        Ok(local
            .params_at(n, None)
            .map(|p| (p.collective_cooperativity(), n_tot_h_saturation(&p))))
    });
    let mut table = Table::new("fig3a", &["n_at", "c1", "c_n", "n_tot_h", "error"]);
    for (&(n, c), res) in grid.iter().zip(results) {
        match res.expect("errors are carried inside") {
            Ok((c_n, sat)) => {
                table.push(vec![n.into(), c.into(), c_n.into(), sat.into(), "".into()])
            }
            Err(e) => table.push(vec![
                n.into(),
                c.into(),
                f64::NAN.into(),
                f64::NAN.into(),
                e.to_string().into(),
            ]),
        }
    }
    Ok(table)
}

pub fn fig3b(s: &mut Settings) -> Result<Table, CliError> {
    s.default_physics(1, Some(5.0))?;
    fill_protocol_defaults(s, 30, Engine::Collective, LossPolicy::PaperReduced);
    let n_list = s.n_at_list.get_or_insert_with(|| vec![1, 2, 4, 8]).clone();
    let settings = s.clone();
    let results = sweep(&n_list, |&n| {
        Ok(settings.params_at(n, None).and_then(|p| {
            let spec = protocol_spec(&settings, p, settings.field_phase.unwrap_or(0.0))?;
            Ok((p, run_protocol(&spec)?))
        }))
    });
    let mut table = Table::new(
        "fig3b",
        &columns(&["n_at", "c_n"], &["n_tot_h_closed_form", "error"]),
    );
    for (&n, res) in n_list.iter().zip(results) {
        match res.expect("errors are carried inside") {
            Ok((p, trace)) => {
                for r in &trace.rows {
                    let mut row = vec![n.into(), p.collective_cooperativity().into()];
                    row.extend(trace_cells(r));
                    row.push(n_tot_h_closed_form(Horizon::Photons(r.n_v as u64), &p).into());
                    row.push("".into());
                    table.push(row);
                }
            }
            Err(e) => {
                let mut row = vec![n.into(), f64::NAN.into()];
                row.extend(missing_trace_cells());
                row.push(f64::NAN.into());
                row.push(e.to_string().into());
                table.push(row);
            }
        }
    }
    Ok(table)
}

pub fn fig4(s: &mut Settings) -> Result<Table, CliError> {
    s.default_physics(4, Some(5.0))?;
    s.field_phase.get_or_insert(0.25);
    fill_protocol_defaults(s, 40, Engine::Exact, LossPolicy::Discard);
    let params = s.params()?;
    let phi = s.field_phase.unwrap_or(0.25);
    let series = [
        ("free-rotation", DriveMode::FreeRotation, phi),
        ("photons", DriveMode::Photons, 0.0),
        ("photons-field", DriveMode::Photons, phi),
    ];
    let mut table = Table::new("fig4", &columns(&["series"], &[]));
    for (name, drive, phi) in series {
        let mut spec = protocol_spec(s, params, phi)?;
        spec.drive = drive;
        let trace = run_protocol(&spec)?;
        for r in &trace.rows {
            let mut row = vec![name.into()];
            row.extend(trace_cells(r));
            table.push(row);
        }
    }
    Ok(table)
}

pub fn fig_s2(s: &mut Settings) -> Result<Table, CliError> {
    s.default_physics(4, Some(5.0))?;
    let part = *s.part.get_or_insert(FigurePart::Map);
    let n_v = match part {
        FigurePart::Map => 20,
        FigurePart::Panels => 60,
    };
    fill_protocol_defaults(s, n_v, Engine::Exact, LossPolicy::Discard);
    let n = s.n_at.unwrap_or(4);
    let settings = s.clone();
    let run = move |d: f64, phi: f64| -> Result<(PhysicalParams, ProtocolTrace), CliError> {
        let p = settings.params_at(n, Some(d))?;
        Ok((p, run_protocol(&protocol_spec(&settings, p, phi)?)?))
    };
    match part {
        FigurePart::Map => {
            let dets = linspace(
                *s.detuning_min.get_or_insert(-12.0),
                *s.detuning_max.get_or_insert(12.0),
                *s.detuning_steps.get_or_insert(49),
            )?;
            let phis = linspace(
                *s.phi_min.get_or_insert(0.0),
                *s.phi_max.get_or_insert(0.2),
                *s.phi_steps.get_or_insert(21),
            )?;
            let grid: Vec<(f64, f64)> = dets
                .iter()
                .flat_map(|&d| phis.iter().map(move |&phi| (d, phi)))
                .collect();
            let results = sweep(&grid, |&(d, phi)| Ok(run(d, phi)));
            let mut table =
                Table::new("figS2", &columns(&["detuning", "omega", "phi"], &["error"]));
            for (&(d, phi), res) in grid.iter().zip(results) {
                let res = res.expect("errors are carried inside");
                let omega = res.as_ref().map_or(f64::NAN, |(p, _)| p.omega);
                let prefix = vec![d.into(), omega.into(), phi.into()];
                push_trace_point(&mut table, prefix, &res.map(|(_, t)| t), RowSelect::Final);
            }
            Ok(table)
        }
        FigurePart::Panels => {
            let panels = [
                ("c", 10.0, 0.01),
                ("d", 10.0, 0.18),
                ("e", 0.5, 0.01),
                ("f", 0.5, 0.18),
            ];
            let results = sweep(&panels, |&(_, d, phi)| Ok(run(d, phi)));
            let mut table =
                Table::new("figS2", &columns(&["panel", "detuning", "phi"], &["error"]));
            for (&(name, d, phi), res) in panels.iter().zip(results) {
                let res = res.expect("errors are carried inside").map(|(_, t)| t);
                push_trace_point(
                    &mut table,
                    vec![name.into(), d.into(), phi.into()],
                    &res,
                    RowSelect::All,
                );
            }
            Ok(table)
        }
    }
}

pub fn validate(s: &mut Settings) -> Result<(Table, ValidationReport), CliError> {
    let defaults = ValidateOptions::default();
    let opts = ValidateOptions {
        suites: s.suite.get_or_insert_with(|| Suite::ALL.to_vec()).clone(),
        seed: *s.seed.get_or_insert(defaults.seed),
        fault: s.fault,
    };
    let report = run_validation(&opts);
    let mut table = Table::new(
        "validate",
        &["suite", "check", "max_error", "tolerance", "passed"],
    );
    for suite in &report.suites {
        for c in &suite.checks {
            table.push(vec![
                suite.suite.as_str().into(),
                c.name.clone().into(),
                c.max_error.into(),
                c.tolerance.into(),
                (if c.passed { "true" } else { "false" }).into(),
            ]);
        }
    }
    Ok((table, report))
}
