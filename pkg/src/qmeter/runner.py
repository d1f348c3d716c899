"""Dispatch a validated scenario to the library and assemble its report."""
from __future__ import annotations

import math
import time

import numpy as np

from .config import ScenarioConfig, matrix_literal
from .joint import joint_uncertainty_report, marginals
from .metrics import compatible_joint, is_unbiased, precision, precision_decomposition, spread
from .model import associated_pom, born_distribution, choi_distance, naimark_dilate, \
    realize_instrument, scheme_to_instrument
from .operators import dag, norm
from .repeated import sql_report
from .report import Report
from .search import sql_violation_search
from .suites import DEFAULT_TRIALS, run_suite

IDENTITY_TOL = 1e-9


class ScenarioError(ValueError):
    """Module error raised while running a scenario, tagged with its kind."""


def _finite(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _label(x):
    return list(x) if isinstance(x, tuple) else x


def _born(cfg: ScenarioConfig, r: Report):
    pom, rho = cfg.objects["pom"], cfg.objects["state"]
    dist = born_distribution(pom, rho)
    r.tables["distribution"] = [{"outcome": _label(x), "probability": p} for x, p in zip(dist.labels, dist.probs)]
    mean, var, std = spread(pom, rho)
    r.scalars.update(mean=mean, variance=var, std=std, outcomes=len(dist.labels))
    r.checks["normalized"] = abs(sum(dist.probs) - 1) <= cfg.equality_tol


def _precision(cfg: ScenarioConfig, r: Report):
    pom, a, rho = cfg.objects["pom"], cfg.objects["observable"], cfg.objects["state"]
    eps = precision(pom, a, rho)
    parts = precision_decomposition(pom, a, rho)
    unbiased = is_unbiased(pom, a)
    dx, da = spread(pom, rho)[1], spread(a.as_pom(), rho)[1]
    r.scalars.update(epsilon=eps, epsilon_sq=eps ** 2, pom_variance=parts.pom_variance,
                     operator_variance=parts.operator_variance, bias=parts.bias,
                     delta_x=math.sqrt(dx), delta_a=math.sqrt(da), unbiased=unbiased)
    mu = compatible_joint(pom, a, rho)
    r.tables["joint_distribution"] = [{"x": x, "a": y, "probability": p}
                                      for (x, y), p in zip(mu.labels, mu.probs)]
    tol = max(cfg.equality_tol, IDENTITY_TOL)
    r.checks["decomposition"] = abs(eps ** 2 - parts.total) <= tol
    if unbiased:
        r.checks["variance_identity"] = abs(eps ** 2 - (dx - da)) <= tol


def _joint(cfg: ScenarioConfig, r: Report):
    m = cfg.objects["joint_pom"]
    a, b, rho = cfg.objects["observable"], cfg.objects["observable_b"], cfg.objects["state"]
    rep = joint_uncertainty_report(m, a, b, rho, slack=cfg.equality_tol)
    r.scalars.update(eps_a=rep.eps_a, eps_b=rep.eps_b, delta_x=rep.delta_x, delta_y=rep.delta_y,
                     c=rep.c, product_eps=rep.product_eps, product_delta=rep.product_delta,
                     check1=rep.check1, check2=rep.check2)
    r.tables["joint_distribution"] = [
        {"x": x, "y": y, "probability": float(np.trace(e @ rho.op).real)} for _, _, x, y, e in m.cells()]
    for name, pom in zip(("x", "y"), marginals(m)):
        dist = born_distribution(pom, rho)
        r.tables[f"marginal_{name}"] = [{"outcome": x, "probability": p} for x, p in zip(dist.labels, dist.probs)]
    r.checks["check1"] = rep.check1
    r.checks["check2"] = rep.check2


def _sql_scalars(r: Report, rep):
    r.scalars.update(sigma=rep.sigma, epsilon_after=rep.epsilon_after, delta_sq=rep.delta_sq, rhs=rep.rhs,
                     condition_holds=rep.condition_holds, sql_holds=rep.sql_holds,
                     ratio=_finite(rep.ratio), excluded_weight=rep.excluded_weight,
                     excluded_weight_flag=rep.excluded_weight_flag)
    r.tables["outcomes"] = [{"outcome": row.outcome, "probability": row.probability,
                             "prediction": row.prediction, "uncertainty": row.uncertainty} for row in rep.rows]
    r.checks["implication"] = rep.implication_holds


def _sql(cfg: ScenarioConfig, r: Report):
    o = cfg.objects
    _sql_scalars(r, sql_report(o["model"], o["observable"], o["hamiltonian"], o["tau"], o["state"]))


def _realize(cfg: ScenarioConfig, r: Report):
    t = cfg.objects["model"]
    scheme = realize_instrument(t, seed=cfg.seed)
    dist = choi_distance(scheme_to_instrument(scheme), t)
    r.scalars.update(choi_distance=dist, probe_dim=scheme.probe_dim, system_dim=t.dim, outcomes=len(t.outcomes))
    r.tables["associated_pom"] = [{"outcome": x, "effect": matrix_literal(e)}
                                  for x, e in zip(associated_pom(t).outcomes, associated_pom(t).effects)]
    r.checks["roundtrip"] = dist <= cfg.roundtrip_tol


def _naimark(cfg: ScenarioConfig, r: Report):
    x = cfg.objects["pom"]
    v, sharp = naimark_dilate(x)
    iso = norm(dag(v) @ v - np.eye(x.dim))
    eff = max(norm(dag(v) @ sharp.projectors[sharp.outcomes.index(lab)] @ v - e)
              for lab, e in zip(x.outcomes, x.effects))
    r.scalars.update(system_dim=x.dim, dilated_dim=v.shape[0], isometry_defect=iso, effect_defect=eff)
    r.checks["isometry"] = iso <= cfg.equality_tol
    r.checks["effects"] = eff <= cfg.equality_tol


def _suite(cfg: ScenarioConfig, r: Report):
    name = cfg.data["suite"]
    trials = cfg.data.get("trials", DEFAULT_TRIALS[name])
    res = run_suite(name, trials, cfg.seed)
    r.scalars.update(suite=name, trials=res.trials, violations=res.violations,
                     max_defect=res.max_defect, tolerance=res.tolerance)
    for k, v in sorted(res.details.items()):
        r.scalars[f"detail_{k}"] = v
    r.checks["suite"] = res.passed


def _search(cfg: ScenarioConfig, r: Report):
    o = cfg.objects
    opts = cfg.data.get("search", {})
    rho = o.get("state")
    res = sql_violation_search(o["observable"].dim, o["observable"], o["hamiltonian"], o["tau"],
                               budget=opts.get("budget", 400), seed=cfg.seed, rho=rho,
                               objective=opts.get("objective", "ratio"),
                               rhs_floor=float(opts.get("rhs_floor", 0.1)))
    r.scalars.update(status=res.status, evaluations=res.evaluations, violation_found=res.violation)
    r.tables["kraus"] = []
    if res.report is not None:
        _sql_scalars(r, res.report)
        for x, ks in zip(res.best.outcomes, res.best.kraus_sets):
            for j, k in enumerate(ks):
                r.tables["kraus"].append({"outcome": x, "index": j, "matrix": matrix_literal(k)})


RUNNERS = {
    "born": _born,
    "precision": _precision,
    "joint": _joint,
    "sql": _sql,
    "realize": _realize,
    "naimark": _naimark,
    "suite": _suite,
    "search": _search,
}


def run_scenario(cfg: ScenarioConfig) -> Report:
    """Run one scenario; module errors are re-raised as :class:`ScenarioError`."""
    r = Report(cfg.kind, cfg.data, timing=cfg.timing)
    start = time.perf_counter()
    try:
        RUNNERS[cfg.kind](cfg, r)
    except ValueError as exc:
        raise ScenarioError(f"scenario {cfg.kind}: {exc}") from exc
    r.wall_time = time.perf_counter() - start
    r.scalars["pass"] = r.passed
    for key, value in r.scalars.items():
        if isinstance(value, float) and not math.isfinite(value):
            raise ScenarioError(f"scenario {cfg.kind}: non-finite value for {key}")
    return r

