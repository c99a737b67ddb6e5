"""Smoke test for the lambda_zeno_py extension module.

Build and install first:  pip install --no-build-isolation ./crates/python
"""

import math

import lambda_zeno_py as lz


def close(a, b, tol=1e-10):
    return abs(a - b) <= tol


def main():
    # one lossless atom splits a sigma+ photon evenly between sigma+ and sigma-
    p1 = lz.PhysicalParams(1)
    out = lz.scatter(lz.GroundState.dark(1), p1, "plus")
    assert close(out.probability("plus"), 0.5), out.probability("plus")
    assert close(out.probability("minus"), 0.5)
    assert close(out.loss, 0.0)

    # the dark state never flips a V photon
    p4 = lz.PhysicalParams(4)
    dark = lz.GroundState.dark(4)
    out = lz.scatter(dark, p4, "V")
    assert close(out.probability("H"), 0.0, 1e-12)
    assert close(out.probability("V"), 1.0)

    # kicked protocol: S_z decays by Re(chi) per photon and the H count
    # matches the closed form
    lossy = lz.PhysicalParams.with_collective_cooperativity(4, 5.0)
    tr = lz.run_protocol(lossy, 12, engine="collective", loss_policy="paper-reduced")
    _, chi = lz.polarizability(lossy)
    for k, sz in enumerate(tr.sz):
        assert close(sz, tr.sz[0] * chi.real**k), (k, sz)
    assert close(tr.n_tot_h[-1], lz.n_tot_h(lossy, 12))

    # exact engine with a static field keeps a finite spin
    tr = lz.run_protocol(lossy, 40, field_phase=0.18)
    assert tr.sz[-1] > 0.1 and math.isfinite(tr.n_tot_h[-1])

    ok, failures = lz.validate(["kick", "airy"])
    assert ok, failures

    try:
        lz.PhysicalParams(0)
    except ValueError:
        pass
    else:
        raise AssertionError("n_at = 0 must be rejected")

    print("smoke test passed")


if __name__ == "__main__":
    main()
