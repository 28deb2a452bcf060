"""Acceptance criteria, one printed PASS/FAIL line each (see the terminal summary)."""

import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import record
from fracns.experiments import (loglog_fit, reference_scenario, run_counterexample_A,
                                run_counterexample_B)
from fracns.grid import (Mode, RandomModes, SpaceGrid, SpectralField, TaylorGreen, TimeGrid,
                         VectorField, divergence, force_A, force_B, forward_transform, gradient,
                         inverse_transform, sample_analytic)
from fracns.norms import (MorreyScan, besov_thermic_norm, force_F_norm, linfty_alpha_norm,
                          morrey_sobolev_norm, parabolic_morrey_norm, rescale)
from fracns.operators import fractional_laplacian_power, leray_project
from fracns.params import ModelParams, derive_force_indices, derive_morrey_indices
from fracns.semigroup import (SymbolSpec, kernel_radial_profile, ksigma_lp_norm,
                              lp_slope_prediction, verify_kernel_bound_ratio)
from fracns.solver import SolveConfig, duhamel_time_integral, heat_term, picard_solve

SEED = 20240611
ALPHA = 1.5


# 1 -------------------------------------------------------------------------


def test_c1_index_arithmetic_exact():
    P = ModelParams(Fraction(3, 2), 3)
    rho = derive_force_indices(P, 3, Fraction(1, 3)).rho
    p_a = derive_morrey_indices(P, Fraction(29, 10), Fraction(7, 5)).frak_p
    t2 = derive_morrey_indices(P, Fraction(5, 2), Fraction(7, 5))
    got = (rho, p_a, t2.frak_p, t2.frak_q)
    want = (Fraction(4, 9), Fraction(29, 12), Fraction(25, 12), Fraction(15, 2))
    ok = all(isinstance(g, Fraction) and g == w for g, w in zip(got, want))
    record("1", ok, f"rho={rho} frak_p={p_a} (frak_p,frak_q)=({t2.frak_p},{t2.frak_q})")
    assert ok


# 2 -------------------------------------------------------------------------


@pytest.mark.parametrize("alpha,d", [(1.2, 1), (1.2, 3), (1.5, 1), (1.5, 3), (1.8, 1), (1.8, 3)])
def test_c2_kernel_two_sided_bound(alpha, d):
    worst, unstable, nonpos = 0.0, [], False
    for t in (0.25, 1.0, 4.0):
        prof = kernel_radial_profile(alpha, d, t, 20.0, 401)
        fine = kernel_radial_profile(alpha, d, t, 20.0, 801)
        nonpos |= bool(np.any(prof.values <= 0) or np.any(fine.values <= 0))
        s1 = verify_kernel_bound_ratio(prof)["spread"]
        s2 = verify_kernel_bound_ratio(fine)["spread"]
        worst = max(worst, s1)
        if max(s1, s2) > 2 * min(s1, s2):
            unstable.append(t)
    ok = not nonpos and worst < 50 and not unstable
    record(f"2 (alpha={alpha}, d={d})", ok,
           f"max/min ratio={worst:.3f} (limit 50), unstable t={unstable}, nonpositive={nonpos}")
    assert ok


# 3 -------------------------------------------------------------------------


@pytest.mark.parametrize("d,degree,p", [(1, 0.0, 2.0), (3, 1.0, 1.0), (3, 0.0, 2.0)])
def test_c3_lp_homogeneity(d, degree, p):
    ts = 2.0 ** np.arange(-3, 4)
    sym = SymbolSpec("power", degree)
    vals = [ksigma_lp_norm(sym, t, ALPHA, p, d) for t in ts]
    fit = loglog_fit(ts, vals)
    pred = lp_slope_prediction(d, ALPHA, p, degree)
    ok = abs(fit.exponent - pred) < 1e-2
    record(f"3 (d={d}, gamma={degree}, p={p})", ok,
           f"slope={fit.exponent:.6f} predicted={pred:.6f}")
    assert ok


# 4 -------------------------------------------------------------------------


def _besov_family(sg):
    fams = [Mode((1.0, 0.0, 0.0), (0.0, 1.0, 0.0)), Mode((0.0, 2.0, 0.0), (0.0, 0.0, 1.0)),
            Mode((3.0, 0.0, 0.0), (0.0, 0.0, 2.0)), TaylorGreen(3, 1.0, 1.0),
            TaylorGreen(3, 2.0, 0.5)]
    fams += [RandomModes(3, SEED + i, count=2 + i, kmax=1 + i % 3, solenoidal=True)
             for i in range(5)]
    return [sample_analytic(f, sg) for f in fams]


def test_c4_thermic_norm_equivalence():
    sg = SpaceGrid(3, 16, math.pi)
    ratios = []
    for psi in _besov_family(sg):
        h = besov_thermic_norm(psi, ALPHA - 1, "heat", ALPHA).value
        f = besov_thermic_norm(psi, ALPHA - 1, "fractional", ALPHA).value
        ratios.append(h / f)
    ok = len(ratios) == 10 and all(0.1 <= r <= 10 for r in ratios)
    record("4", ok, f"heat/fractional ratios in [{min(ratios):.4f}, {max(ratios):.4f}] over 10 fields")
    assert ok


# 5 -------------------------------------------------------------------------


def test_c5_critical_rescaling():
    sg, tg = SpaceGrid(3, 16, math.pi), TimeGrid(4.0, 16)
    u0 = sample_analytic(RandomModes(3, SEED, count=3, kmax=2, solenoidal=True), sg)
    u = heat_term(u0, tg, ALPHA)
    t1 = derive_force_indices(ModelParams(Fraction(3, 2), 3), 3, Fraction(1, 3))
    t2 = derive_morrey_indices(ModelParams(Fraction(3, 2), 3), Fraction(5, 2), Fraction(7, 5))
    fA = sample_analytic(force_A(3, math.pi, float(t1.rho)), sg, tg)
    fB = sample_analytic(force_B((1.0, 0.0, 0.0), (0.0, 1.0, 0.0)), sg, tg)
    q = (3 + ALPHA) / (ALPHA - 1)
    scan = MorreyScan.for_grid(sg, tg, ALPHA, stride=2)
    p1, gam, fp, fq = 2.5, float(t2.gamma), float(t2.frak_p), float(t2.frak_q)

    base = {
        "Linf_alpha": linfty_alpha_norm(u, ALPHA).value,
        "F": force_F_norm(fA, t1).value,
        "Morrey": parabolic_morrey_norm(u, p1, q, scan, ALPHA, refine_check=False).value,
        "W": morrey_sobolev_norm(fB, gam, fp, fq, scan, ALPHA, refine_check=False).value,
    }
    worst = {"Linf_alpha": 0.0, "F": 0.0, "Morrey": 0.0, "W": 0.0}
    for lam in (0.5, 2.0, 4.0):
        ul, fAl, fBl = (rescale(u, lam, "velocity", ALPHA), rescale(fA, lam, "force", ALPHA),
                        rescale(fB, lam, "force", ALPHA))
        sl = scan.scaled(lam)
        got = {
            "Linf_alpha": linfty_alpha_norm(ul, ALPHA).value,
            "F": force_F_norm(fAl, t1).value,
            "Morrey": parabolic_morrey_norm(ul, p1, q, sl, ALPHA, refine_check=False).value,
            "W": morrey_sobolev_norm(fBl, gam, fp, fq, sl, ALPHA, refine_check=False).value,
        }
        for k in got:
            worst[k] = max(worst[k], abs(got[k] - base[k]) / base[k])
    tol = {"Linf_alpha": 1e-10, "F": 1e-10, "Morrey": 1e-2, "W": 1e-2}
    ok = all(worst[k] <= tol[k] for k in tol)
    record("5", ok, " ".join(f"{k}:{worst[k]:.2e}(tol {tol[k]:.0e})" for k in tol))
    assert ok


# 6 -------------------------------------------------------------------------


def _embedding_family(i, n, N):
    sg, tg = SpaceGrid(3, n, math.pi), TimeGrid(4.0, N)
    r = np.random.default_rng(SEED + i)
    desc = RandomModes(3, SEED + i, int(r.integers(1, 6)), int(r.integers(1, 3)),
                       amplitude=float(r.uniform(0.1, 10)), solenoidal=True)
    return heat_term(sample_analytic(desc, sg), tg, ALPHA)


@pytest.mark.parametrize("p1", [2.5, 2.9])
def test_c6_morrey_embedding_constant(p1):
    q = (3 + ALPHA) / (ALPHA - 1)
    consts = []
    for n, N, stride in ((8, 16, 1), (16, 32, 2)):
        ratios = []
        for i in range(20):
            u = _embedding_family(i, n, N)
            scan = MorreyScan.for_grid(u.sgrid, u.tgrid, ALPHA, stride=stride)
            m = parabolic_morrey_norm(u, p1, q, scan, ALPHA, refine_check=False).value
            ratios.append(m / linfty_alpha_norm(u, ALPHA).value)
        consts.append(max(ratios))
    c0, c1 = consts
    ok = all(math.isfinite(c) and c > 0 for c in consts) and max(c0, c1) <= 2 * min(c0, c1)
    record(f"6 (p1={p1})", ok, f"C coarse={c0:.4f} C fine={c1:.4f} (stability factor {max(c0, c1) / min(c0, c1):.3f}, limit 2)")
    assert ok


# 7 -------------------------------------------------------------------------


def test_c7_picard_convergence():
    sg, tg = SpaceGrid(3, 16, math.pi), TimeGrid(1.0, 32)
    cfg = SolveConfig(max_iters=60, stop_tol=1e-12, alpha=ALPHA)
    lines, ok = [], True
    for amp in (1e-2, 1.0):
        u0 = sample_analytic(TaylorGreen(3, 1.0, amp), sg)
        rep = picard_solve(u0, None, tg, cfg)
        fine = picard_solve(u0, None, tg.refined(4), cfg)
        ref = fine.final.data[3::4]
        diff = float(np.abs(rep.final.data - ref).max() / np.abs(ref).max())
        good = (rep.converged and all(c < 1 for c in rep.contraction_factors)
                and rep.residual < 1e-8 and diff < 1e-4)
        ok &= good
        lines.append(f"amp={amp:g}: max factor={max(rep.contraction_factors):.3g} "
                     f"residual={rep.residual:.2e} finer-grid diff={diff:.2e}")
    big = picard_solve(sample_analytic(TaylorGreen(3, 1.0, 100.0), sg), None, tg,
                       SolveConfig(max_iters=40, stop_tol=1e-12, alpha=ALPHA))
    noncontract = big.diverged or (not big.converged) or max(big.contraction_factors) >= 1
    ok &= noncontract
    lines.append(f"amp=100: diverged={big.diverged} max factor={max(big.contraction_factors):.3g}")
    record("7", ok, "; ".join(lines))
    assert ok


# 8 -------------------------------------------------------------------------


def test_c8_counterexample_A():
    out = run_counterexample_A(reference_scenario("counterexample_A"))
    F, fit, pred = out["F_norm"], out["W_divergence"], out["predicted_exponent"]
    ok = (math.isfinite(F.value) and F.refinement_delta < 0.01
          and abs(fit.exponent - pred) <= 0.2 * abs(pred) and fit.r_squared > 0.99)
    record("8", ok, f"F={F.value:.6f} delta={F.refinement_delta:.2e}; exponent={fit.exponent:.5f} "
           f"vs {pred:.5f} r2={fit.r_squared:.5f}; embedding holds={out['embedding'].holds}")
    assert ok
    assert pred == pytest.approx(-2 / 27, abs=1e-12)


# 9 -------------------------------------------------------------------------


def test_c9_counterexample_B():
    out = run_counterexample_B(reference_scenario("counterexample_B"))
    W, fit = out["W_norm"], out["M_growth"]
    ok = out["spectral_identity"] < 1e-12 and W.refinement_delta < 0.05 and abs(fit.exponent - 0.4) <= 0.05
    record("9", ok, f"identity err={out['spectral_identity']:.2e}; W={W.value:.5f} delta={W.refinement_delta:.2e}; "
           f"growth exponent={fit.exponent:.4f} (r2={fit.r_squared:.4f})")
    assert ok


# 10 ------------------------------------------------------------------------


def test_c10_duhamel_time_integral():
    r = np.random.default_rng(SEED)
    worst = 0.0
    for a, b in r.uniform(0, 1, size=(20, 2)):
        exact = duhamel_time_integral(a, b, 1.0)
        quadv = duhamel_time_integral(a, b, 1.0, method="quad")
        worst = max(worst, abs(exact - quadv) / abs(quadv))
    ts = 2.0 ** np.arange(-4, 5)
    vals = [duhamel_time_integral(1 / ALPHA, 2 * (ALPHA - 1) / ALPHA, t) for t in ts]
    slope = loglog_fit(ts, vals).exponent
    ok = worst < 1e-8 and abs(slope - (1 - ALPHA) / ALPHA) < 1e-10
    record("10", ok, f"max rel quad mismatch={worst:.2e}; exponent={slope:.12f} (want -1/3)")
    assert ok


# 11 ------------------------------------------------------------------------


def test_c11_operator_algebra():
    r = np.random.default_rng(SEED)
    errs = {"idempotent": 0.0, "kills_grad": 0.0, "div_free": 0.0, "inverse": 0.0}
    for d, n in ((2, 32), (3, 16)):
        sg = SpaceGrid(d, n, math.pi)
        for _ in range(5):
            u = forward_transform(VectorField(sg, r.standard_normal((d,) + sg.shape)))
            P = leray_project(u)
            PP = leray_project(P)
            errs["idempotent"] = max(errs["idempotent"], float(np.abs(PP.coeffs - P.coeffs).max()) / P.norm())
            errs["div_free"] = max(errs["div_free"], float(np.abs(divergence(P).coeffs).max()) / u.norm())
            phi = forward_transform(VectorField(sg, r.standard_normal(sg.shape)))
            g = gradient(phi)
            errs["kills_grad"] = max(errs["kills_grad"], leray_project(g).norm() / g.norm())
            c = phi.coeffs.copy()
            c[(0,) + (0,) * d] = 0.0
            z = SpectralField(sg, c)
            s = float(r.uniform(-2, 2))
            back = fractional_laplacian_power(fractional_laplacian_power(z, s), -s)
            errs["inverse"] = max(errs["inverse"], float(np.abs(back.coeffs - c).max()) / z.norm())
            rt = inverse_transform(back)
            assert rt.data.shape == (1,) + sg.shape
    ok = all(v < 1e-10 for v in errs.values())
    record("11", ok, " ".join(f"{k}={v:.1e}" for k, v in errs.items()))
    assert ok
