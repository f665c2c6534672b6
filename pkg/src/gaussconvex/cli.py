"""Command-line harness: one subcommand per verification, plus ``all`` and ``fixtures``.

Exit status: 0 when every check passes, 1 when any check fails (the
failure list is printed as JSON on stderr and stored in the report),
2 for malformed input or configuration, 3 for a numerical failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import sys
from dataclasses import dataclass, field
from importlib import metadata, resources
from pathlib import Path
from typing import Callable, Optional

import jsonschema
import numpy as np
import scipy

from . import oracles as _oracles
from ._util import jsonable, to_csv
from .conic_volumes import (
    PolyhedralCone,
    binomial_profile,
    convexity_probe,
    dual_cone,
    estimate_profile,
    mgf_identity_check,
    moreau_probe,
    tail_bound_check,
    variance_identity_check,
)
from .distributions import ScalarDistribution
from .expsum_lab import (
    ExpSum,
    InvariantViolation,
    count_zeros,
    fit_two_zeros,
    positivity_violations,
    sign_pattern_check,
)
from .fixtures import fixtures_for, list_fixtures
from .gauss_core import GENERATOR_NAME, SeededStream
from .mgf_convexity import (
    DEFAULT_TOL,
    InsufficientDomainError,
    chernoff_lower_tail_check,
    lambda_profile,
    mgf_upper_bound_check,
    strict_convexity_gap,
)
from .nnls import NumericalFailure
from .renyi_div import (
    RelativeDensity,
    chain_check,
    chi_squared,
    comparison_check,
    hellinger,
    kl_divergence,
    renyi_divergence,
)
from .transport_char import concavity_test, gaussian_transport_map
from .wills_functional import ConvexBody, f_K, polygon_f_exact, wills_mc

SUBCOMMANDS = ("mgf", "transport", "renyi", "conic", "wills", "expsum")
DEFAULT_SAMPLES = 100_000
MIN_SAMPLES = 1000
# stream-id bases; chunk j of a run uses base + j, so bases are far apart
STREAM_BASE = {"mgf": 1_000_000, "transport": 2_000_000, "renyi": 3_000_000, "conic": 4_000_000,
               "conic_dual": 5_000_000, "wills": 6_000_000, "expsum": 7_000_000, "probe": 8_000_000}


class InputError(ValueError):
    """Malformed input or configuration (exit status 2)."""


@dataclass
class Check:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    gating: bool = True

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "gating": self.gating, **jsonable(self.details)}


@dataclass
class Outcome:
    results: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    input_path: Optional[str] = None
    seed: int = 0
    samples: int = DEFAULT_SAMPLES
    tol: Optional[float] = None
    out_dir: str = "gc_out"
    format: str = "csv"
    quick: bool = False

    @property
    def n_samples(self) -> int:
        return max(MIN_SAMPLES, self.samples // 10) if self.quick else self.samples

    def stream(self, key: str, fixture_index: int = 0) -> SeededStream:
        return SeededStream(self.seed, STREAM_BASE[key] + 10_000 * fixture_index)


# ---------------------------------------------------------------------------
# input helpers

def load_schema(name: str) -> dict:
    return json.loads(resources.files("gaussconvex").joinpath("schemas", f"{name}.json").read_text())


def validate(name: str, obj) -> None:
    validator = jsonschema.Draft202012Validator(load_schema(name))
    err = jsonschema.exceptions.best_match(validator.iter_errors(obj))
    if err is not None:
        pointer = "/" + "/".join(str(p) for p in err.absolute_path)
        raise InputError(f"schema violation at {pointer}: {err.message}")


def parse_grid(spec) -> np.ndarray:
    if isinstance(spec, list):
        return np.asarray(spec, dtype=float)
    if "num" in spec:
        return np.linspace(spec["start"], spec["stop"], int(spec["num"]))
    n = int(round((spec["stop"] - spec["start"]) / spec["step"])) + 1
    return spec["start"] + spec["step"] * np.arange(n)


def build_distribution(spec: dict, stream: SeededStream, samples: int) -> ScalarDistribution:
    fam = spec["family"]
    try:
        if fam == "gaussian":
            return ScalarDistribution.gaussian(spec.get("mu", 0.0), spec.get("var", 1.0))
        if fam == "poisson":
            return ScalarDistribution.poisson(spec["rate"])
        if fam == "exponential":
            return ScalarDistribution.exponential(spec.get("rate", 1.0))
        if fam == "pushforward":
            name = spec["oracle"]
            if name == "affine":
                orc = _oracles.affine(spec.get("slope", 1.0), spec.get("intercept", 0.0))
            else:
                orc = _oracles.BUILTIN_CONVEX_1D[name]()
            return ScalarDistribution.pushforward(orc)
        if fam == "samples":
            return ScalarDistribution.from_samples(spec["values"])
        if fam == "poisson_samples":
            n = int(spec.get("count", samples))
            return ScalarDistribution.from_samples(stream.generator().poisson(spec["rate"], n))
        if fam == "density":
            return ScalarDistribution.from_density(spec["grid"], spec["density"])
    except (KeyError, ValueError) as exc:
        raise InputError(f"bad distribution: {exc}") from exc
    raise InputError(f"unknown family {fam!r}")


# ---------------------------------------------------------------------------
# subcommand runners; each takes a validated input and returns an Outcome

def run_mgf(inp: dict, cfg: RunConfig, idx: int = 0) -> Outcome:
    out = Outcome()
    stream = cfg.stream("mgf", idx)
    dist = build_distribution(inp["distribution"], stream.substream(5000), cfg.n_samples)
    grid = parse_grid(inp["p_grid"])
    tol = DEFAULT_TOL if cfg.tol is None else cfg.tol
    prof = lambda_profile(dist, grid, tol)
    out.tables["lambda"] = prof.to_csv
    out.results["distribution"] = dist.label
    out.results["min_second_difference"] = prof.min_second_difference
    if inp.get("expect_affine"):
        atol = 1e-9 if cfg.tol is None else cfg.tol
        worst = float(np.nanmax(np.abs(prof.second_differences)))
        out.checks.append(Check("lambda_affine", worst <= atol, {"max_abs_second_difference": worst, "tol": atol}))
    else:
        out.checks.append(Check("lambda_convex", prof.is_convex(),
                                {"min_second_difference": prof.min_second_difference, "violations": prof.violations()}))
    if "chord" in inp:
        ch = inp["chord"]
        gap = float(strict_convexity_gap(dist, ch["p0"], ch["p1"], [ch["p"]], "convex")[0])
        need = ch.get("min_gap", -tol)
        out.results["chord_gap"] = gap
        out.checks.append(Check("chord_gap", gap >= need, {"gap": gap, "required": need, **ch}))
    for lam in inp.get("lambda_bound", []):
        b = mgf_upper_bound_check(dist, lam, tol)
        out.checks.append(Check("mgf_upper_bound", b.holds, {"lam": lam, "lhs": b.lhs, "rhs": b.rhs}))
    if inp.get("tail_t"):
        rows = chernoff_lower_tail_check(dist, inp["tail_t"], stream, cfg.n_samples)
        out.tables["lower_tail"] = lambda lines=(): to_csv(
            ("t", "empirical", "bound", "stderr", "holds"),
            [(r.t, r.empirical, r.bound, r.stderr, r.holds) for r in rows], lines)
        for r in rows:
            out.checks.append(Check("chernoff_lower_tail", r.holds, r.__dict__.copy()))
    return out


def run_transport(inp: dict, cfg: RunConfig, idx: int = 0) -> Outcome:
    import warnings

    out = Outcome()
    stream = cfg.stream("transport", idx)
    dist = build_distribution(inp["distribution"], stream, cfg.n_samples)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        tmap = gaussian_transport_map(dist, parse_grid(inp["grid"]), cfg.tol)
    res = concavity_test(tmap)
    out.tables["transport_map"] = tmap.to_csv
    out.results.update(distribution=dist.label, excluded_points=tmap.excluded,
                       warnings=[str(w.message) for w in caught],
                       is_concave=res.is_concave, witness=res.witness, max_second_difference=res.max_violation)
    expect = inp.get("expect_concave", True)
    passed = res.is_concave == expect and (expect or res.witness is not None)
    out.checks.append(Check("transport_concavity", passed,
                            {"expected_concave": expect, "is_concave": res.is_concave, "witness": res.witness}))
    return out


def _relative_density(spec: dict, cfg: RunConfig, idx: int) -> RelativeDensity:
    if spec["kind"] == "linear":
        orc = _oracles.linear_form(spec["a"], float(spec.get("b", 0.0)))
    else:
        orc = _oracles.concave_quadratic(spec["Q"], spec.get("b"), float(spec.get("c", 0.0)))
    return RelativeDensity(orc, samples=cfg.n_samples, seed=cfg.seed)


def run_renyi(inp: dict, cfg: RunConfig, idx: int = 0) -> Outcome:
    out = Outcome()
    try:
        rd = _relative_density(inp["f"], cfg, idx)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    d2, kl, dh = renyi_divergence(rd, 2.0), kl_divergence(rd), renyi_divergence(rd, 0.5)
    chi2, hel2 = chi_squared(rd), hellinger(rd)
    out.results.update(method=rd.method, normalization=rd.normalization, renormalized=rd.renormalized,
                       D2=d2.to_dict(), KL=kl.to_dict(), D_half=dh.to_dict(), chi_squared=chi2, hellinger_sq=hel2)
    bridge_tol = 1e-9 if rd.method == "quadrature" else 1e-6
    out.checks.append(Check("chi_squared_bridge", abs(math.log1p(chi2) - d2.value) <= bridge_tol * max(1.0, d2.value),
                            {"log1p_chi2": math.log1p(chi2), "D2": d2.value}))
    out.checks.append(Check("hellinger_bridge", abs(-2.0 * math.log1p(-hel2 / 2.0) - dh.value) <= bridge_tol,
                            {"from_hellinger": -2.0 * math.log1p(-hel2 / 2.0), "D_half": dh.value}))
    ch = chain_check(rd)
    tol = ch.tol if cfg.tol is None else cfg.tol
    out.checks.append(Check("chain", ch.d2 <= ch.two_kl + tol and ch.two_kl <= ch.four_d_half + tol,
                            {**ch.to_dict(), "tol": tol}))
    rows = []
    for a, b in inp.get("pairs", [[1.0, 2.0]]):
        cmp = comparison_check(rd, a, b)
        t = cmp.tol if cfg.tol is None else cfg.tol
        ok = cmp.ratio_bound_slack >= -t and cmp.monotone_slack >= -t
        rows.append(cmp.to_dict())
        out.checks.append(Check("comparison", ok, {**cmp.to_dict(), "tol": t}))
        if "expect_equality" in inp:
            eq_tol = 1e-6
            tight = cmp.ratio_bound_slack <= eq_tol
            if inp["expect_equality"]:
                out.checks.append(Check("equality_case", tight, {"alpha": a, "beta": b,
                                                                  "ratio_bound_slack": cmp.ratio_bound_slack}))
            else:
                out.checks.append(Check("strict_case", cmp.ratio_bound_slack >= 1e-3,
                                        {"alpha": a, "beta": b, "ratio_bound_slack": cmp.ratio_bound_slack}))
    out.results["comparisons"] = rows
    return out


def run_conic(inp: dict, cfg: RunConfig, idx: int = 0) -> Outcome:
    out = Outcome()
    try:
        cone = PolyhedralCone.from_json(inp)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    N = cfg.n_samples
    stream = cfg.stream("conic", idx)
    prof = estimate_profile(cone, N, stream)
    out.tables["profile"] = prof.to_csv
    out.results["summary"] = prof.summary()
    out.checks.append(Check("profile_sums_to_one", prof.sums_to_one, {"sum": float(prof.v.sum())}))
    out.checks.append(Check("delta_estimators_agree", prof.deltas_agree,
                            {"delta_faces": prof.delta, "delta_proj": prof.delta_proj, "stderr": prof.delta_gap_stderr}))
    out.checks.append(Check("flagged_fraction", prof.flagged_fraction <= 0.01,
                            {"flagged_fraction": prof.flagged_fraction}, gating=False))
    vi = variance_identity_check(cone, N, stream, prof)
    out.results["variance_identity"] = vi.to_dict()
    out.checks.append(Check("variance_identity", vi.agree, vi.to_dict()))
    ref_kind = inp.get("reference", "none")
    reference = None
    if ref_kind == "binomial":
        reference = binomial_profile(cone.n)
    elif ref_kind == "subspace":
        reference = np.zeros(cone.n + 1)
        reference[cone.lineality_dim] = 1.0
    if reference is not None:
        err = np.abs(prof.v - reference)
        tol_v = np.maximum(0.01, 3.0 * prof.v_stderr)
        out.checks.append(Check("reference_profile", bool(np.all(err <= tol_v)),
                                {"max_abs_error": float(err.max()), "reference": ref_kind}))
    eta = inp.get("eta_grid", [-1.0, 0.5])
    rows = mgf_identity_check(cone, eta, N, stream, reference, prof)
    out.tables["mgf_identity"] = lambda lines=(): to_csv(
        ("eta", "xi", "lhs", "lhs_stderr", "rhs", "rhs_stderr", "rel_err", "tol", "holds"),
        [(r.eta, r.xi, r.lhs, r.lhs_stderr, r.rhs, r.rhs_stderr, r.rel_err, r.tol, r.holds) for r in rows], lines)
    for r in rows:
        out.checks.append(Check("mgf_identity", r.holds, r.to_dict()))
    tails = tail_bound_check(cone, inp.get("t_grid", [1.0, 2.0]), N, stream, prof)
    out.tables["tail_bounds"] = lambda lines=(): to_csv(
        ("t", "side", "empirical", "sigma2", "bound", "stderr", "holds"),
        [(r.t, r.side, r.empirical, r.sigma2, r.bound, r.stderr, r.holds) for r in tails], lines)
    for r in tails:
        out.checks.append(Check("tail_bound", r.holds, r.to_dict()))
    probe = cfg.stream("probe", idx)
    if cone.generators is not None and cone.generators.shape[1] <= 14:
        pts = probe.generator().standard_normal((200, cone.n))
        mp = moreau_probe(cone, pts)
        tol = 1e-8 if cfg.tol is None else cfg.tol
        out.results["moreau"] = mp
        out.checks.append(Check("moreau", mp["max_residual"] <= tol and mp["max_orthogonality"] <= tol, {**mp, "tol": tol}))
    cp = convexity_probe(cone, probe.substream(1))
    out.results["convexity"] = cp
    out.checks.append(Check("convexity", cp["midpoint_violations"] == 0 and cp["nonexpansive_violations"] == 0, cp))
    if inp.get("duality") and cone.generators is not None:
        polar = dual_cone(cone)
        pd = estimate_profile(polar, N, cfg.stream("conic_dual", idx))
        z = np.abs(pd.v - prof.v[::-1]) / np.maximum(np.hypot(pd.v_stderr, prof.v_stderr[::-1]), 1e-300)
        ok_v = bool(np.all((np.abs(pd.v - prof.v[::-1]) == 0) | (z <= 3.0)))
        gap = prof.delta + pd.delta - cone.n
        se = math.hypot(prof.delta_stderr, pd.delta_stderr)
        out.results["polar_summary"] = pd.summary()
        out.tables["polar_profile"] = pd.to_csv
        out.checks.append(Check("duality_profile", ok_v, {"max_z": float(np.max(z))}))
        out.checks.append(Check("duality_delta", abs(gap) <= 3.0 * se, {"gap": gap, "stderr": se}))
    return out


def run_wills(inp: dict, cfg: RunConfig, idx: int = 0) -> Outcome:
    out = Outcome()
    try:
        body = ConvexBody.from_json(inp)
    except (KeyError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    stream = cfg.stream("wills", idx)
    out.checks.append(Check("bounding_radius", body.check_radius(cfg.stream("probe", idx)), {"r": body.r}))
    rep = wills_mc(body, cfg.n_samples, stream)
    d = rep.to_dict()
    out.results["report"] = d
    out.checks.append(Check("W_at_least_one", rep.W_estimate >= 1.0 - 3.0 * rep.W_stderr - 1e-12,
                            {"W": rep.W_estimate, "stderr": rep.W_stderr}))
    for key, ok in rep.closed_form_agreement().items():
        out.checks.append(Check(f"closed_form_{key}", ok, {"estimate": d[f"{key}_estimate"], "closed": d[f"{key}_closed"]}))
    out.checks.append(Check("mcmullen", rep.mcmullen_holds, {"slack": rep.mcmullen_slack, "stderr": rep.mcmullen_stderr}))
    out.checks.append(Check("reversal_main", rep.main_holds, {"lhs": rep.log_W, "rhs_main": rep.rhs_main}))
    out.checks.append(Check("reversal_corollary_scaled", rep.corollary_scaled_holds,
                            {"rhs_main": rep.rhs_main, "rhs_cor_scaled": rep.rhs_cor_scaled}))
    # E f >= V_1 - r^2/2 is stated for K in rB but only follows for sqrt(2 pi) K in rB;
    # reported, not gating
    out.checks.append(Check("reversal_corollary_as_stated", rep.corollary_holds,
                            {"rhs_main": rep.rhs_main, "rhs_cor": rep.rhs_cor}, gating=False))
    if body.kind == "polytope" and body.n == 2:
        Z = cfg.stream("probe", idx).substream(1).generator().standard_normal((1000, 2))
        diff = float(np.max(np.abs(f_K(body, Z) - np.array([polygon_f_exact(body.params["vertices"], z) for z in Z]))))
        tol = 1e-6 if cfg.tol is None else cfg.tol
        out.checks.append(Check("f_identity", diff <= tol, {"max_abs_diff": diff, "tol": tol}))
    return out


def _expsum_rows(psi: ExpSum, interval=None) -> tuple[dict, list[Check]]:
    zc = count_zeros(psi, tuple(interval) if interval else None)
    checks = [Check("zero_count_bound", zc.count <= psi.n, {"count": zc.count, "n": psi.n})]
    if zc.count >= 2 and psi.n >= 1:
        d = psi.rolle_derivative()
        dz = count_zeros(d, zc.interval) if hasattr(d, "p") else None
        ok = dz is not None and all(any(a < t < b for t in dz.roots) for a, b in zip(zc.roots, zc.roots[1:]))
        checks.append(Check("rolle_consistency", ok, {"roots": zc.roots}))
    sp = sign_pattern_check(psi, zc if interval is None else None)
    if sp.skipped is None:
        checks.append(Check("sign_pattern", sp.passes, sp.to_dict()))
    return {"sum": psi.to_json(), "zeros": zc.to_dict(), "sign_pattern": sp.to_dict()}, checks


def run_expsum(inp: dict, cfg: RunConfig, idx: int = 0) -> Outcome:
    out = Outcome()
    sums, fits = [], []
    try:
        psis = [(ExpSum.from_json(s), s.get("interval")) for s in inp.get("sums", [])]
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    for psi, interval in psis:
        row, checks = _expsum_rows(psi, interval)
        sums.append(row)
        out.checks.extend(checks)
    fit_specs = [(f["p"], f["x"]) for f in inp.get("fits", [])]
    rnd = inp.get("random")
    rng = cfg.stream("expsum", idx).generator()
    if rnd:
        worst = 0
        sign_checked = 0
        for _ in range(int(rnd.get("sums", 0))):
            k = int(rnd.get("terms", 4))
            p = np.sort(rng.uniform(-3.0, 3.0, k))
            c = rng.uniform(-1.0, 1.0, k)
            c[c == 0] = 0.5
            if np.any(np.diff(p) < 1e-12):
                continue
            _, checks = _expsum_rows(ExpSum(p, c))
            worst = max(worst, checks[0].details["count"])
            sign_checked += sum(1 for ch in checks if ch.name == "sign_pattern")
            failed = [ch for ch in checks if not ch.passed]
            out.checks.extend(failed)
        out.checks.append(Check("random_zero_count", worst <= int(rnd.get("terms", 4)) - 1,
                                {"instances": int(rnd.get("sums", 0)), "max_count": worst,
                                 "sign_patterns_checked": sign_checked}))
        for _ in range(int(rnd.get("fits", 0))):
            p = np.sort(rng.uniform(-3.0, 3.0, 3))
            x = np.sort(rng.uniform(-3.0, 3.0, 2))
            fit_specs.append((p.tolist(), x.tolist()))
    bad = 0
    for p, x in fit_specs:
        if not (p[0] < p[1] < p[2]) or x[0] == x[1]:
            if rnd:
                continue
            raise InputError(f"fit needs p0 < p < p1 and x0 != x1, got {p}, {x}")
        fit = fit_two_zeros(*p, *x)
        viol = positivity_violations(fit)
        sp = sign_pattern_check(fit.psi)
        ok = fit.c0 < 0 and fit.c1 < 0 and viol == 0 and sp.passes and fit.residual <= 1e-10
        bad += not ok
        if len(fits) < 20:
            fits.append({**fit.to_dict(), "positivity_violations": viol, "sign_pattern": sp.to_dict(), "ok": ok})
    if fit_specs:
        out.checks.append(Check("fit_two_zeros", bad == 0, {"instances": len(fit_specs), "violations": bad}))
    out.results.update(sums=sums, fits=fits)
    return out


RUNNERS: dict[str, Callable[[dict, RunConfig, int], Outcome]] = {
    "mgf": run_mgf, "transport": run_transport, "renyi": run_renyi,
    "conic": run_conic, "wills": run_wills, "expsum": run_expsum,
}


# ---------------------------------------------------------------------------
# reports

def _versions() -> dict:
    try:
        pkg = metadata.version("artifact")
    except metadata.PackageNotFoundError:  # pragma: no cover
        pkg = "unknown"
    return {"gaussconvex": pkg, "numpy": np.__version__, "scipy": scipy.__version__}


def _provenance(cfg: RunConfig, sub: str) -> dict:
    return {"subcommand": sub, "seed": cfg.seed, "N": cfg.n_samples, "quick": cfg.quick,
            "tol": cfg.tol, "generator": GENERATOR_NAME, "versions": _versions()}


def _header(cfg: RunConfig) -> dict:
    return {"timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")}


def _write_outcome(name: str, outcome: Outcome, cfg: RunConfig, sub: str, folder: Path) -> dict:
    folder.mkdir(parents=True, exist_ok=True)
    header = _header(cfg)
    prov = _provenance(cfg, sub)
    hdr_lines = [f"timestamp: {header['timestamp']}"]
    body_lines = [f"{k}: {json.dumps(jsonable(v), sort_keys=True)}" for k, v in prov.items()]
    files = []
    if cfg.format == "csv":
        for tname, render in outcome.tables.items():
            path = folder / f"{name}_{tname}.csv"
            text = render(hdr_lines + body_lines)
            path.write_text(text, newline="")
            files.append(path.name)
    body = {"provenance": prov, "fixture": name, "results": jsonable(outcome.results),
            "checks": [c.to_dict() for c in outcome.checks], "tables": files}
    if cfg.format == "json":
        body["table_data"] = {t: r() for t, r in outcome.tables.items()}
    body["failures"] = [c for c in body["checks"] if c["gating"] and not c["passed"]]
    (folder / f"{name}.json").write_text(json.dumps({"header": header, "body": body}, indent=2, sort_keys=True,
                                                    allow_nan=True) + "\n", newline="")
    return body


def _run_inputs(sub: str, inputs: list[tuple[str, dict]], cfg: RunConfig, folder: Path) -> list[dict]:
    bodies = []
    for i, (name, inp) in enumerate(inputs):
        validate(sub, inp)
        outcome = RUNNERS[sub](inp, cfg, i)
        bodies.append(_write_outcome(name, outcome, cfg, sub, folder))
    return bodies


def run(cfg: RunConfig) -> int:
    """Execute ``cfg``; returns the exit status."""
    out_dir = Path(cfg.out_dir)
    try:
        if cfg.samples < MIN_SAMPLES:
            raise InputError(f"--samples must be at least {MIN_SAMPLES}")
        if cfg.format not in ("csv", "json"):
            raise InputError("--format must be csv or json")
        if not (0 <= cfg.seed < 2**64):
            raise InputError("--seed must be a 64-bit unsigned integer")
        if cfg.subcommand == "all":
            bodies = []
            for sub in SUBCOMMANDS:
                inputs = [(f["name"], f["input"]) for f in fixtures_for(sub)]
                bodies += _run_inputs(sub, inputs, cfg, out_dir / sub)
        else:
            if cfg.input_path:
                try:
                    obj = json.loads(Path(cfg.input_path).read_text())
                except (OSError, json.JSONDecodeError) as exc:
                    raise InputError(f"cannot read input: {exc}") from exc
                inputs = [(obj.get("name") or Path(cfg.input_path).stem, obj)] if isinstance(obj, dict) \
                    else [(f"input{i}", o) for i, o in enumerate(obj)]
            else:
                inputs = [(f["name"], f["input"]) for f in fixtures_for(cfg.subcommand)]
            bodies = _run_inputs(cfg.subcommand, inputs, cfg, out_dir / cfg.subcommand)
    except InputError as exc:
        print(json.dumps({"error": "input", "message": str(exc)}), file=sys.stderr)
        return 2
    except (NumericalFailure, OverflowError, InvariantViolation, InsufficientDomainError,
            np.linalg.LinAlgError) as exc:
        print(json.dumps({"error": "numerical", "type": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 3
    failures = [{"fixture": b["fixture"], **f} for b in bodies for f in b["failures"]]
    summary = {"subcommand": cfg.subcommand, "fixtures": [b["fixture"] for b in bodies],
               "checks": sum(len(b["checks"]) for b in bodies), "failures": failures}
    (out_dir / "summary.json").write_text(json.dumps(jsonable(summary), indent=2, sort_keys=True) + "\n")
    if failures:
        print(json.dumps(jsonable({"failures": failures})), file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", dest="input_path", help="JSON input file (default: built-in fixtures)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    common.add_argument("--tol", type=float, default=None, help="override deterministic tolerances")
    common.add_argument("--out-dir", default=None, help="report directory (env GC_OUT_DIR overrides)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--quick", action="store_true", help="divide the sample count by 10")
    parser = argparse.ArgumentParser(prog="gaussconvex", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS + ("all",):
        sub.add_parser(name, parents=[common])
    sub.add_parser("fixtures", help="print the fixture inventory as JSON")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.subcommand == "fixtures":
        print(json.dumps(jsonable(list_fixtures()), indent=2, sort_keys=True))
        return 0
    out_dir = os.environ.get("GC_OUT_DIR") or args.out_dir or "gc_out"
    cfg = RunConfig(args.subcommand, args.input_path, args.seed, args.samples, args.tol, out_dir,
                    args.format, args.quick)
    try:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(json.dumps({"error": "input", "message": f"out_dir not writable: {exc}"}), file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
