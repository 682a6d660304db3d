"""Execute scenarios and collect their CSV rows and pass/fail checks."""

from __future__ import annotations

import csv
import dataclasses
import io
from dataclasses import dataclass, field

import numpy as np

from .. import frame as frames
from .. import measure, rng
from ..algebra import validate_algebra
from ..differential import is_degenerate, sr_jacobian
from ..errors import ConfigError
from ..maps import identity
from ..regions import D2Box, Region, image_bounds
from .ratefit import RateFit, fit_loglog_slope
from .scenario import Scenario

CSV_COLUMNS = ("scenario_id", "estimator", "delta", "samples", "value", "stderr", "seed")
SR_JACOBIAN_TOL = 1e-12
FRAME_BRACKET_TOL = 1e-8
FRAME_FILTRATION_TOL = 1e-12


@dataclass(frozen=True)
class Row:
    estimator: str
    value: float
    delta: float | None = None
    samples: int | None = None
    stderr: float | None = None


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""


@dataclass
class Report:
    scenario_id: str
    kind: str
    seed: int
    rows: list[Row] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    fits: dict[str, RateFit] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, estimator, value, delta=None, samples=None, stderr=None):
        self.rows.append(Row(estimator, float(value), delta, samples, stderr))

    def check(self, name, passed, measured, threshold, detail=""):
        self.checks.append(Check(name, bool(passed), float(measured), float(threshold), detail))

    def to_csv(self) -> str:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
                return str(int(v))
            return format(float(v), ".17g")

        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow([self.scenario_id, r.estimator, fmt(r.delta), fmt(r.samples),
                             fmt(r.value), fmt(r.stderr), str(self.seed)])
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"{self.scenario_id} [{self.kind}] seed={self.seed}: "
                 f"{'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            lines.append(f"  {'ok  ' if c.passed else 'FAIL'} {c.name}: measured {c.measured:.6g}"
                         f" vs threshold {c.threshold:.6g}" + (f" ({c.detail})" if c.detail else ""))
        for fit in self.fits.values():
            lines.append(f"  fit slope {fit.slope:.4f}, log-log residual {fit.residual:.3g}")
        lines.extend(f"  note: {n}" for n in self.notes)
        return "\n".join(lines)


def _point(value, dim, where):
    if value is None:
        return np.zeros(dim)
    arr = np.asarray(value, dtype=float)
    if arr.shape != (dim,):
        raise ConfigError(f"params.{where}: expected {dim} coordinates")
    return arr


def _area_verify(s: Scenario, report: Report, workers):
    p = s.params
    lhs = measure.area_lhs(s.map, s.region, p["samples"], s.seed, workers=workers)
    rhs = measure.area_rhs_multiplicity(s.map, s.region, p["image_delta"], s.seed,
                                        samples=p["samples"], workers=workers)
    report.add("area_lhs", lhs.value, samples=lhs.samples, stderr=lhs.stderr)
    report.add(f"area_rhs_{rhs.method}", rhs.value, delta=rhs.delta,
               samples=p["samples"] if rhs.method == "pushforward" else None)
    ratio = lhs.value / rhs.value if rhs.value > 0 else np.inf
    report.add("area_ratio", ratio, delta=rhs.delta, samples=p["samples"])
    report.check("lhs_rhs_ratio", abs(ratio - 1) <= p["tolerance"], abs(ratio - 1),
                 p["tolerance"], f"LHS/RHS = {ratio:.6f}")
    if rhs.low_occupancy:
        report.notes.append("image grid sparsely occupied; RHS may be biased low")

    mult = p["multiplicity"]
    if mult is not None:
        if isinstance(mult, bool) or not isinstance(mult, int) or mult < 1:
            raise ConfigError("params.multiplicity: expected a positive integer")
        piece = s.region.pieces[0]
        single = measure.area_rhs_multiplicity(s.map.restrict(piece), Region((piece,)),
                                               p["image_delta"], s.seed,
                                               samples=p["samples"], workers=workers)
        report.add("area_rhs_single_piece", single.value, delta=single.delta)
        factor = rhs.value / (mult * single.value)
        report.check("multiplicity", abs(factor - 1) <= p["tolerance"], abs(factor - 1),
                     p["tolerance"], f"RHS / ({mult} x single piece) = {factor:.6f}")
        report.notes.append(f"multiplicity histogram {dict(sorted(rhs.multiplicity.items()))}")


def _zero_set(s: Scenario, report: Report, workers):
    p = s.params
    x0 = s.region.pieces[0].sample(rng.stream(s.seed, 0), 1)[0]
    degenerate = is_degenerate(s.map.differential(x0))
    report.check("degenerate_differential", degenerate, float(degenerate), 1.0,
                 "rank of the hc-differential below the dimension")
    pairs = []
    for delta in p["deltas"]:
        est = measure.area_rhs_multiplicity(s.map, s.region, delta, s.seed,
                                            samples=p["samples"], workers=workers)
        report.add("image_measure", est.value, delta=delta, samples=p["samples"])
        pairs.append((delta, est.value))
    ref = measure.area_rhs_multiplicity(identity(s.map.pre_alg), s.region, p["reference_delta"],
                                        s.seed, samples=p["samples"], workers=workers)
    report.add("reference_image_measure", ref.value, delta=ref.delta)
    fit = fit_loglog_slope(pairs)
    report.fits["image_measure"] = fit
    report.check("decay_exponent", fit.slope >= p["min_slope"], fit.slope, p["min_slope"])
    ratio = pairs[-1][1] / ref.value
    report.check("final_over_reference", ratio <= p["max_ratio"], ratio, p["max_ratio"],
                 f"at delta = {pairs[-1][0]:g}")


def lat_deviations(frm, u, epsilons, pairs: int, seed: int) -> list[tuple[float, float]]:
    """Largest |d2_frame(v, w) - d2^u(v, w)| over random pairs in Box(u, eps).

    Boxes are d2-boxes of the tangent cone, carried to the manifold by the
    exponential chart at ``u``.
    """
    cone = frames.tangent_cone(frm, u)
    out = []
    for k, eps in enumerate(epsilons):
        box = D2Box(cone.alg, np.zeros(frm.dim), eps)
        g = rng.stream(seed, k)
        w = cone.point(box.sample(g, pairs))
        v = cone.point(box.sample(g, pairs))
        dev = np.abs(frames.d2_frame(frm, v, w) - cone.d2(w, v))
        out.append((float(eps), float(dev.max())))
    return out


def _lat_rate(s: Scenario, report: Report, workers):
    p = s.params
    u = _point(p["base_point"], s.frame.dim, "base_point")
    data = lat_deviations(s.frame, u, p["epsilons"], p["pairs"], s.seed)
    for eps, dev in data:
        report.add("lat_max_deviation", dev, delta=eps, samples=p["pairs"])
    fit = fit_loglog_slope(data)
    report.fits["lat_max_deviation"] = fit
    depth = s.frame.grading.depth
    report.check("rate_exponent", fit.slope >= p["min_slope"], fit.slope, p["min_slope"],
                 f"theoretical exponent 1 + 1/M = {1 + 1 / depth:g}; the gate leaves a margin "
                 "for pair sampling and Newton noise")
    if p["max_slope"] is not None:
        report.check("rate_exponent_upper", fit.slope <= p["max_slope"], fit.slope,
                     p["max_slope"])


def _jac_equiv(s: Scenario, report: Report, workers):
    p = s.params
    x = _point(p["point"], s.map.pre_alg.dim, "point")
    hom = s.map.differential(x)
    jac = sr_jacobian(hom)
    report.add("sr_jacobian", jac)
    if p["expected"] is not None:
        expected = float(p["expected"])
        err = abs(jac - expected)
        report.check("sr_jacobian_expected", err <= SR_JACOBIAN_TOL * max(1.0, expected), err,
                     SR_JACOBIAN_TOL * max(1.0, expected))
    f = hom.full_matrix
    if f.shape[0] == f.shape[1]:
        det = abs(float(np.linalg.det(f)))
        report.add("abs_det_full_matrix", det)
        err = abs(jac - det)
        report.check("sr_jacobian_equals_abs_det", err <= SR_JACOBIAN_TOL * max(1.0, det), err,
                     SR_JACOBIAN_TOL * max(1.0, det))
    for t in p["ts"]:
        ratio = measure.local_distortion(s.map, x, t, samples=p["samples"], seed=s.seed,
                                         workers=workers)
        report.add("local_distortion", ratio, delta=t, samples=p["samples"])
        if jac > 0:
            err = abs(ratio / jac - 1)
            report.check(f"local_distortion_t={t:g}", err <= p["tolerance"], err, p["tolerance"],
                         f"ratio {ratio:.6g} vs J = {jac:.6g}")
        else:
            report.check(f"local_distortion_t={t:g}", ratio <= p["tolerance"], ratio,
                         p["tolerance"], "degenerate map: distortion should vanish")


def _measure_est(s: Scenario, report: Report, workers):
    p = s.params
    alg = s.group
    bounds = [image_bounds(lambda x: x, piece, rng.stream(s.seed, measure.BOUNDS_STREAM + k))
              for k, piece in enumerate(s.region.pieces)]
    lower = np.min([b[0] for b in bounds], axis=0)
    upper = np.max([b[1] for b in bounds], axis=0)
    est = measure.hausdorff_estimate(alg, s.region.contains, p["delta"], lower=lower,
                                     upper=upper, workers=workers)
    lebesgue = measure.OMEGA_NU * s.region.volume
    report.add("hausdorff_estimate", est.value, delta=est.delta)
    report.add("omega_times_lebesgue", lebesgue)
    ratio = est.value / lebesgue
    report.check("normalization", abs(ratio - 1) <= p["tolerance"], abs(ratio - 1),
                 p["tolerance"], f"estimate / (omega_nu * volume) = {ratio:.6f}")
    for k, piece in enumerate(s.region.pieces):
        if not isinstance(piece, D2Box):
            continue
        vol = measure.rejection_volume(piece, p["samples"], s.seed + k)
        report.add(f"rejection_volume_piece{k}", vol, samples=p["samples"])
        err = abs(vol / piece.volume - 1)
        report.check(f"box_volume_piece{k}", err <= p["volume_tolerance"], err,
                     p["volume_tolerance"], f"closed form {piece.volume:.6g}")


def _validate(s: Scenario, report: Report, workers):
    if s.group is not None:
        for c in validate_algebra(s.group).checks:
            report.add(f"algebra_{c.name}", c.residual)
            report.check(f"algebra_{c.name}", c.passed, c.residual, 0.0, c.detail)
    if s.frame is not None:
        frm = s.frame
        pts = rng.stream(s.seed, 0).uniform(frm.lower, frm.upper,
                                            size=(s.params["points"], frm.dim))
        res = frames.frame_residuals(frm, pts)
        limits = {"span_deficit": 0.0, "bracket": FRAME_BRACKET_TOL,
                  "filtration": FRAME_FILTRATION_TOL}
        for name, limit in limits.items():
            report.add(f"frame_{name}", res[name], samples=len(pts))
            report.check(f"frame_{name}", res[name] <= limit, res[name], limit)


_KINDS = {
    "area_verify": _area_verify,
    "zero_set": _zero_set,
    "lat_rate": _lat_rate,
    "jac_equiv": _jac_equiv,
    "measure_est": _measure_est,
    "validate": _validate,
}


def run_scenario(s: Scenario, *, seed: int | None = None, workers: int | None = None) -> Report:
    """Run one scenario; ``seed`` overrides the file's seed."""
    if seed is not None:
        s = dataclasses.replace(s, seed=int(seed))
    report = Report(s.id, s.kind, s.seed)
    _KINDS[s.kind](s, report, workers)
    return report
