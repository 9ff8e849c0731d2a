"""Named verification suites and the runner that turns them into a report.

A suite expands into units, each producing report entries for one check at
one site.  Units are independent, so they can run in worker processes; the
report is assembled in unit order, which keeps it byte-stable.
"""
from __future__ import annotations

import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Callable, List, Optional, Sequence, Tuple

from .errors import FanNotComplete, SignIncoherence, ToricKoszulError
from .fan import Cone, Fan, invariant_factors_of, vsub
from .geometry import (EquivariantLineBundle, canonical_bundle, check_entry, cousin_check, psi,
                       serre_check, tensor_line_bundle, to_sheaf, trivial_bundle)
from .homology import DegreeWindow, chambers, verification_degrees
from .koszul import (augmented_K_structure, cellular_complex, check_sign_coherence,
                     commute_square_check, constant_diagram, koszul_K)
from .sheaves import (SheafOfModules, hom_pieces, is_coherent, single_term, standard_open,
                      standard_point, structure_sheaf)
from .stalks import piece_dim_A

SUITES = ("validate", "koszul-selfcheck", "complete-acyclicity", "serre-check",
          "cousin-check", "hom-table", "commute-check")

Unit = Callable[[], List[dict]]


@dataclass
class Job:
    fan: Fan
    suite: str
    fan_label: Any = None
    sheaf: Any = None
    sheaf_label: Any = None
    window: Optional[DegreeWindow] = None
    chambers: bool = False
    jobs: int = 1

    def job_degrees(self) -> List[Tuple[int, ...]]:
        s = self.sheaf
        if s is None:
            return []
        if isinstance(s, EquivariantLineBundle):
            return list(s.chars.values())
        if isinstance(s, list):
            return [d for L in s for d in L.chars.values()]
        return s.job_degrees() if s.flavor == "A" else []

    def resolve_window(self) -> DegreeWindow:
        if self.window is None:
            self.window = verification_degrees(self.fan.rank, self.job_degrees())
        return self.window

    def degrees(self) -> List[Tuple[int, ...]]:
        pts = set(self.resolve_window().points())
        if self.chambers:
            twists = self.job_degrees() or [(0,) * self.fan.rank]
            pts.update(chambers(self.fan, twists, self.window))
        return sorted(pts)


def _entry(name, site, failures, count):
    return check_entry(name, site, failures, count)


def _dual_open_piece(fan, sigma, m, rho, d) -> int:
    """Piece of A^v_[sigma](m) at costalk rho, degree d."""
    return int(set(rho) <= set(sigma)) * piece_dim_A(fan, rho, vsub(m, d))


def _dual_point_piece(fan, sigma, m, rho, d) -> int:
    return int(rho == sigma) * piece_dim_A(fan, rho, vsub(m, d))


# -- validate ----------------------------------------------------------------------

def _validate_fan(fan: Fan) -> List[dict]:
    out = []
    bad = [list(c) for c in fan.cones if c and any(f != 1 for f in invariant_factors_of(
        [list(fan.rays[i]) for i in c]))]
    out.append(_entry("smooth", None, [{"cones": bad}] if bad else [], len(fan.cones)))
    cones = set(fan.cones)
    missing = [list(f) for c in fan.cones for f in fan.facets(c) if f not in cones]
    out.append(_entry("face-closure", None, [{"missing": missing}] if missing else [], len(fan.cones)))
    try:
        check_sign_coherence(fan)
        fails = []
    except SignIncoherence as exc:
        fails = [{"error": str(exc)}]
    out.append(_entry("sign-coherence", None, fails, len(fan.cones)))
    return out


def _validate_sheaf(sheaf) -> List[dict]:
    try:
        F = psi(sheaf) if not isinstance(sheaf, SheafOfModules) else sheaf
        F.check_sheaf_law()
        fails = []
    except ToricKoszulError as exc:
        return [_entry("sheaf-law", None, [{"error": str(exc)}], 1)]
    entry = _entry("sheaf-law", None, fails, len(F.fan.cones))
    entry["coherent"] = is_coherent(F)
    return [entry]


def validate_units(job: Job) -> List[Unit]:
    units = [partial(_validate_fan, job.fan)]
    if job.sheaf is not None:
        units.append(partial(_validate_sheaf, job.sheaf))
    return units


# -- koszul self-check ---------------------------------------------------------------

def _koszul_generators(fan: Fan, sigma: Cone, pts) -> List[dict]:
    point_fail, open_fail = [], []
    count = 0
    k = -len(sigma)
    for m in pts:
        kp = koszul_K(standard_point(fan, sigma, m))
        ko = koszul_K(standard_open(fan, sigma, m))
        for rho in fan.cones:
            for d in pts:
                count += 1
                for cx, want, fails in ((kp, _dual_open_piece(fan, sigma, m, rho, d), point_fail),
                                        (ko, _dual_point_piece(fan, sigma, m, rho, d), open_fail)):
                    ec = cx.evaluate(rho, d)
                    h = dict(zip(ec.degrees, ec.cohomology()))
                    got = {j: x for j, x in h.items() if x}
                    if got != ({k: want} if want else {}):
                        fails.append({"cone": list(rho), "degree": list(d), "twist": list(m),
                                      "expected": want, "complex": ec.to_json()})
    return [_entry("koszul-point", sigma, point_fail, count),
            _entry("koszul-open", sigma, open_fail, count)]


def _twist_equivariance(fan: Fan, sigma: Cone, pts) -> List[dict]:
    fails = []
    zero = (0,) * fan.rank
    base = koszul_K(standard_open(fan, sigma, zero))
    count = 0
    for m in pts:
        km = koszul_K(standard_open(fan, sigma, m))
        for rho in fan.cones:
            for d in pts:
                count += 1
                a, b = km.evaluate(rho, d), base.evaluate(rho, vsub(d, m))
                if a.dims != b.dims or a.maps != b.maps:
                    fails.append({"cone": list(rho), "degree": list(d), "twist": list(m),
                                  "twisted": a.to_json(), "shifted": b.to_json()})
    return [_entry("twist-equivariance", sigma, fails, count)]


def _ball_acyclicity(fan: Fan, sigma: Cone, pts) -> List[dict]:
    fails = []
    count = 0
    for xi in fan.faces(sigma):
        if xi == sigma:
            continue
        for space in (None, partial(piece_dim_A, fan, xi)):
            try:
                cx = cellular_complex(constant_diagram(fan, xi, sigma, space))
            except SignIncoherence as exc:
                fails.append({"cone": list(sigma), "face": list(xi), "error": str(exc)})
                continue
            for m in pts:
                count += 1
                ec = cx.evaluate(m)
                if not ec.is_exact():
                    fails.append({"cone": list(sigma), "face": list(xi), "degree": list(m),
                                  "complex": ec.to_json()})
    return [_entry("ball-acyclicity", sigma, fails, count)]


def _hom_matching(fan: Fan, tau: Cone, pts) -> List[dict]:
    """Hom(A_[tau](m), A_{xi}(n)) against Hom between the K-images."""
    fails = []
    zero = (0,) * fan.rank
    count = 0
    for m in pts:
        pre = koszul_K(standard_open(fan, tau, m)).predual
        for n in pts:
            for xi in fan.cones:
                count += 1
                lhs = hom_pieces(standard_open(fan, tau, m), standard_point(fan, xi, n), zero)
                ec = pre.evaluate(xi, tuple(-x for x in n))
                rhs = dict(zip(ec.degrees, ec.cohomology())).get(len(xi), 0)
                want = piece_dim_A(fan, tau, vsub(m, n)) if xi == tau else 0
                if not lhs == rhs == want:
                    fails.append({"cone": list(xi), "source_cone": list(tau), "m": list(m), "n": list(n),
                                  "sheaf_hom": lhs, "cosheaf_hom": rhs, "expected": want})
    return [_entry("hom-matching", tau, fails, count)]


def _square_zero(label: str, cx, fan: Fan, rho: Cone, pts) -> List[dict]:
    fails = []
    for d in pts:
        ec = cx.evaluate(rho, d)
        bad = ec.square_zero_failures()
        if bad:
            fails.append({"cone": list(rho), "degree": list(d), "at": bad, "complex": ec.to_json()})
    return [_entry(f"d2-zero[{label}]", rho, fails, len(pts))]


def _euler(label: str, N, cx, rho: Cone, pts) -> List[dict]:
    """Euler characteristic of K(N) at (rho, d) from N's generators alone."""
    fan = N.fan
    fails = []
    for d in pts:
        want = 0
        for j, term in N.terms.items():
            for s in fan.cones:
                if set(rho) <= set(s):
                    for g in term.stalk(s).gen_degrees:
                        want += (-1) ** (j - len(s)) * piece_dim_A(fan, rho, vsub(g, d))
        got = cx.evaluate(rho, d).euler()
        if got != want:
            fails.append({"cone": list(rho), "degree": list(d), "euler": got, "expected": want})
    return [_entry(f"koszul-euler[{label}]", rho, fails, len(pts))]


def _d2_unit(fan, label, builder, rho, pts):
    return _square_zero(label, builder(), fan, rho, pts)


def _build_K_structure(fan):
    return koszul_K(structure_sheaf(fan), check=False)


def _build_K_sheaf(sheaf):
    return koszul_K(_as_sheaf(sheaf), check=False)


def _euler_unit(sheaf, rho, pts):
    N = single_term(_as_sheaf(sheaf))
    return _euler("sheaf", N, koszul_K(N, check=False), rho, pts)


def _as_sheaf(sheaf) -> SheafOfModules:
    if isinstance(sheaf, SheafOfModules):
        return sheaf
    return psi(sheaf)


def koszul_units(job: Job) -> List[Unit]:
    fan, pts = job.fan, job.degrees()
    units: List[Unit] = []
    for s in fan.cones:
        units.append(partial(_koszul_generators, fan, s, pts))
        units.append(partial(_twist_equivariance, fan, s, pts))
        units.append(partial(_ball_acyclicity, fan, s, pts))
        units.append(partial(_hom_matching, fan, s, pts))
    for rho in fan.cones:
        units.append(partial(_d2_unit, fan, "structure", partial(_build_K_structure, fan), rho, pts))
    if job.sheaf is not None:
        sheaf = _as_sheaf(job.sheaf)
        if all(sheaf.stalk(c).is_free for c in fan.cones):
            for rho in fan.cones:
                units.append(partial(_d2_unit, fan, "sheaf", partial(_build_K_sheaf, job.sheaf), rho, pts))
                units.append(partial(_euler_unit, job.sheaf, rho, pts))
    return units


# -- complete-fan acyclicity ------------------------------------------------------------

def _augmented_unit(fan: Fan, rho: Cone, pts) -> List[dict]:
    cx = augmented_K_structure(fan, check=False)
    fails = []
    for d in pts:
        ec = cx.evaluate(rho, d)
        if ec.square_zero_failures() or not ec.is_exact():
            fails.append({"cone": list(rho), "degree": list(d), "complex": ec.to_json()})
    return [_entry("augmented-acyclicity", rho, fails, len(pts))]


def acyclicity_units(job: Job) -> List[Unit]:
    if not job.fan.complete:
        raise FanNotComplete("complete-acyclicity needs a complete fan")
    pts = job.degrees()
    return [partial(_augmented_unit, job.fan, rho, pts) for rho in job.fan.cones]


# -- geometry suites -----------------------------------------------------------------

def _geometric_input(job: Job):
    return job.sheaf if job.sheaf is not None else trivial_bundle(job.fan)


def _serre_unit(fan, F, pts, chart):
    return serre_check(fan, F, pts, charts=[chart])


def serre_units(job: Job) -> List[Unit]:
    if not job.fan.complete:
        raise FanNotComplete("serre-check needs a complete fan")
    F = _geometric_input(job)
    pts = job.degrees()
    return [partial(_serre_unit, job.fan, F, pts, c) for c in job.fan.max_cones]


def _cousin_unit(fan, F, twisted: bool, pts, chart):
    G = psi(F)
    label = "omega(x)F" if twisted else "F"
    if twisted:
        G = tensor_line_bundle(G, canonical_bundle(fan))
    out = cousin_check(G, pts, charts=[chart])
    for e in out:
        e["name"] = f"{e['name']}[{label}]"
    return out


def cousin_units(job: Job) -> List[Unit]:
    F = _geometric_input(job)
    pts = job.degrees()
    return [partial(_cousin_unit, job.fan, F, tw, pts, c)
            for tw in (False, True) for c in job.fan.max_cones]


# -- Hom table ----------------------------------------------------------------------

def hom_targets(job: Job) -> List[Tuple[str, SheafOfModules]]:
    fan = job.fan
    zero = (0,) * fan.rank
    out = []
    for t in fan.cones:
        out.append((f"open{list(t)}", standard_open(fan, t, zero)))
        out.append((f"point{list(t)}", standard_point(fan, t, zero)))
    out.append(("structure", structure_sheaf(fan)))
    out.append(("canonical", to_sheaf(canonical_bundle(fan))))
    if job.sheaf is not None:
        out.append(("input", _as_sheaf(job.sheaf)))
    return out


def _hom_unit(fan: Fan, sigma: Cone, targets, pts) -> List[dict]:
    fails = []
    table = []
    count = 0
    for label, G in targets:
        nonzero = 0
        for m in pts:
            P = standard_open(fan, sigma, m)
            for d in pts:
                count += 1
                got = hom_pieces(P, G, d)
                want = G.piece_dim(sigma, tuple(a + b for a, b in zip(m, d)))
                nonzero += got
                if got != want:
                    fails.append({"cone": list(sigma), "object": label, "twist": list(m),
                                  "degree": list(d), "hom": got, "stalk_piece": want})
        table.append([label, nonzero])
    entry = _entry("projective-hom", sigma, fails, count)
    entry["table"] = table
    return [entry]


def hom_units(job: Job) -> List[Unit]:
    targets = hom_targets(job)
    pts = job.degrees()
    return [partial(_hom_unit, job.fan, s, targets, pts) for s in job.fan.cones]


# -- commuting square -------------------------------------------------------------------

def _commute_unit(label, N, pts):
    fails = commute_square_check(N, pts)
    return [_entry(f"commute[{label}]", None, fails, len(pts) * len(N.fan.cones))]


def commute_units(job: Job) -> List[Unit]:
    fan = job.fan
    zero = (0,) * fan.rank
    pts = job.degrees()
    objs = []
    for s in fan.cones:
        objs.append((f"open{list(s)}", standard_open(fan, s, zero)))
        objs.append((f"point{list(s)}", standard_point(fan, s, zero)))
    objs.append(("structure", structure_sheaf(fan)))
    if job.sheaf is not None:
        objs.append(("input", _as_sheaf(job.sheaf)))
    return [partial(_commute_unit, label, N, pts) for label, N in objs]


BUILDERS = {
    "validate": validate_units,
    "koszul-selfcheck": koszul_units,
    "complete-acyclicity": acyclicity_units,
    "serre-check": serre_units,
    "cousin-check": cousin_units,
    "hom-table": hom_units,
    "commute-check": commute_units,
}


# -- runner --------------------------------------------------------------------------

_UNITS: List[Unit] = []


def _run_index(i: int) -> List[dict]:
    return _run_unit(_UNITS[i])


def _run_unit(unit: Unit) -> List[dict]:
    try:
        return unit()
    except ToricKoszulError as exc:
        return [{"name": "error", "site": None, "status": "fail",
                 "error": f"{type(exc).__name__}: {exc}"}]


def run_units(units: Sequence[Unit], jobs: int = 1) -> List[dict]:
    global _UNITS
    if jobs <= 1 or len(units) <= 1:
        results = [_run_unit(u) for u in units]
    else:
        _UNITS = list(units)
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=jobs, mp_context=ctx) as pool:
            results = list(pool.map(_run_index, range(len(units))))
        _UNITS = []
    return [e for batch in results for e in batch]


def run(job: Job) -> Tuple[int, dict]:
    """Exit code (0 pass, 1 failure, 2 input or applicability error) and report."""
    report = {"fan": job.fan_label, "sheaf": job.sheaf_label, "suite": job.suite,
              "chambers": job.chambers}
    if job.suite not in BUILDERS:
        report["error"] = f"unknown suite {job.suite!r}"
        report["checks"] = []
        return 2, report
    try:
        report["window"] = job.resolve_window().to_json()
        units = BUILDERS[job.suite](job)
    except ToricKoszulError as exc:
        report.setdefault("window", None)
        report["checks"] = [{"name": job.suite, "site": None, "status": "inapplicable",
                             "error": f"{type(exc).__name__}: {exc}"}]
        return 2, report
    checks = run_units(units, job.jobs)
    report["checks"] = checks
    failed = sum(1 for c in checks if c["status"] != "pass")
    report["summary"] = {"checks": len(checks), "failed": failed}
    if job.suite == "validate":
        smooth = next(c["status"] == "pass" for c in checks if c["name"] == "smooth")
        report["fan_info"] = {"rank": job.fan.rank, "rays": len(job.fan.rays),
                              "cones": len(job.fan.cones), "smooth": smooth,
                              "complete": job.fan.complete}
    return (1 if failed else 0), report
