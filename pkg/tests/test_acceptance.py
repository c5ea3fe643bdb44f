"""The 13 acceptance criteria at their stated tolerances.

Each test records one ``PASS``/``FAIL`` line; the lines are printed as they
are produced and again in the pytest terminal summary.  Run on its own with

    pytest tests/test_acceptance.py -v

(about 5 minutes on one core; the two nonlinear runs dominate) or as a
script with ``python tests/test_acceptance.py``.
"""

import math
import time

import pytest

from axivort import harness as H

RESULTS = {}


def record(n, title, ok, detail, runtime=None):
    extra = f" [{runtime:.1f}s]" if runtime is not None else ""
    line = f"{'PASS' if ok else 'FAIL'} criterion {n:2d} {title}: {detail}{extra}"
    RESULTS[n] = line
    print(line)
    return ok


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


@pytest.fixture(scope="module")
def ring_run():
    with Timer() as tm:
        res = H.run_ring("gaussian_ring")
    assert res.failure is None, res.failure
    return res, tm.elapsed


@pytest.fixture(scope="module")
def shifted_run():
    res = H.run_ring("shifted_ring")
    assert res.failure is None, res.failure
    return res


def test_c01_kernel_identity():
    with Timer() as tm:
        rel, tail = H.measure_kernel_identity()
    ok = rel <= 1e-10 and 0.95 <= tail <= 1.05 and tm.elapsed < 5
    record(1, "kernel identity", ok, f"max rel gap {rel:.2e} (<=1e-10), tau^1.5 K(1e4) = {tail:.5f} (in [0.95,1.05])", tm.elapsed)
    assert ok


def test_c02_kernel_derivative_bounds():
    with Timer() as tm:
        sups, change = H.measure_kernel_derivative_stability()
    finite = all(math.isfinite(s) for s in sups)
    ok = finite and change <= 1e-3 and tm.elapsed < 5
    sup_txt = ", ".join(f"{s:.4g}" for s in sups)
    record(2, "kernel derivative bounds", ok, f"sups i=0..3 [{sup_txt}], change under 4x refinement {change:.1e} (<=1e-3)", tm.elapsed)
    assert ok


def test_c03_self_similarity():
    with Timer() as tm:
        errs = H.measure_self_similarity()
    worst = max(errs.values())
    ok = worst <= 1e-3 and tm.elapsed < 120
    record(3, "semigroup self-similarity", ok, f"max rel L1 error {worst:.2e} over G1/G2, (s,t)=(1,2),(1,4) (<=1e-3)", tm.elapsed)
    assert ok


def test_c04_composition():
    with Timer() as tm:
        err = H.measure_composition()
    ok = err <= 1e-3 and tm.elapsed < 120
    record(4, "semigroup composition", ok, f"rel L1 error {err:.2e} (<=1e-3)", tm.elapsed)
    assert ok


def test_c05_biot_savart():
    with Timer() as tm:
        err = H.measure_biot_savart()
        curl = H.measure_profile_curl(20, seed=0)
    ok = err <= 1e-3 and curl <= 1e-4 and tm.elapsed < 300
    record(5, "Biot-Savart closed form", ok, f"rel Linf error {err:.2e} (<=1e-3), curl error {curl:.1e} (<=1e-4)", tm.elapsed)
    assert ok


def test_c06_moments():
    with Timer() as tm:
        m = H.measure_moments()
    ok = (
        abs(m["I(G1)-1"]) <= 1e-4
        and abs(m["J(G2)-1"]) <= 1e-4
        and abs(m["J(G1)"]) <= 1e-6
        and abs(m["I(G2)"]) <= 1e-6
        and tm.elapsed < 1
    )
    detail = ", ".join(f"{k}={v:.1e}" for k, v in m.items())
    record(6, "moment identities", ok, detail, tm.elapsed)
    assert ok


def test_c07_impulse_conservation(ring_run):
    res, elapsed = ring_run
    drift = H.measure_impulse_drift(res)
    ok = drift <= 1e-2 and elapsed < 1800
    record(7, "nonlinear impulse conservation", ok, f"max |I-I0|/|I0| = {drift:.1e} (<=1e-2), run {elapsed:.0f}s")
    assert ok


def test_c08_first_order_rate(ring_run):
    res, _ = ring_run
    l1, rem1 = H.measure_first_order_rates(res)
    ok = abs(l1 + 1.0) <= 0.1 and rem1 <= -1.35
    record(8, "first-order vorticity rate", ok, f"L1 slope {l1:.3f} (-1 +/- 0.1), remainder slope {rem1:.3f} (<=-1.35)")
    assert ok


def test_c09_second_order(shifted_run):
    scaled, tail = H.measure_second_order(shifted_run)
    decreasing = all(b < a for a, b in zip(scaled, scaled[1:]))
    ok = decreasing and tail <= -0.35
    vals = ", ".join(f"{v:.4f}" for v in scaled)
    record(9, "second-order structure", ok, f"t^1.5 |w~|_1 at 12.5/25/50 = [{vals}] decreasing, J tail slope {tail:.3f} (<=-0.35)")
    assert ok


def test_c10_velocity_rates(ring_run):
    res, _ = ring_run
    uinf, gap = H.measure_velocity_rates(res)
    ok = uinf <= -1.3 and gap <= -0.85
    record(10, "velocity rates", ok, f"|u|_inf slope {uinf:.3f} (<=-1.3), one-term L2 gap slope {gap:.3f} (<=-0.85; leading scale -0.75)")
    assert ok


def test_c11_estimate_harness():
    with Timer() as tm:
        rows = H.measure_estimates()
    excess = max(slope - pred for _, _, pred, slope, _, _ in rows)
    sat = next(r[3] for r in rows if r[0] == H.SATURATING_CASE and r[1] == "G1")
    ok = len(H.ESTIMATE_CASES) == 12 and excess <= 0.05 and abs(sat + 1.0) <= 0.05 and tm.elapsed < 600
    record(11, "estimate harness", ok, f"12 cases / {len(rows)} data: max slope excess {excess:+.3f} (<=0.05), saturating slope {sat:.4f} (-1 +/- 0.05)", tm.elapsed)
    assert ok


def test_c12_gronwall():
    with Timer() as tm:
        rows = H.measure_gronwall(20, seed=0)
    worst = max(max(m1, m4) / bound for _, _, bound, m1, m4 in rows)
    ok = len(rows) == 20 and worst <= 1.0 and tm.elapsed < 60
    record(12, "Gronwall bound", ok, f"20 random tuples, max simulated/bound over T and 4T = {worst:.3f} (<=1)", tm.elapsed)
    assert ok


def test_c13_refinement():
    coarse, fine = H.DESK_GRID, H.DESK_GRID.refined(2)
    pairs = []
    ss_c, ss_f = H.measure_self_similarity(coarse), H.measure_self_similarity(fine)
    pairs += [(f"S {k}", ss_c[k], ss_f[k]) for k in ss_c]
    pairs.append(("composition", H.measure_composition(coarse), H.measure_composition(fine)))
    pairs.append(("Biot-Savart", H.measure_biot_savart(coarse), H.measure_biot_savart(fine)))
    m_c, m_f = H.measure_moments(coarse), H.measure_moments(fine)
    pairs += [(k, m_c[k], m_f[k]) for k in m_c]
    ratios = {name: H.refinement_ratio(c, f) for name, c, f in pairs}
    worst = min(ratios.values())
    ok = worst >= 3.0
    finite = [r for r in ratios.values() if math.isfinite(r)]
    record(13, "refinement sanity", ok, f"128x256 -> 256x512: min error ratio {worst:.2f} (>=3), "
           f"{len(finite)} ratios measured, {len(ratios) - len(finite)} at the rounding floor")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-v"]))
