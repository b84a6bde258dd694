"""Falsification-style theorem checks.

Each check measures the hypotheses of an implication on finite data and, only
when they hold, probes the conclusion. Hypotheses that fail quarantine the
function (status ``inconclusive``); a failed conclusion under satisfied
hypotheses is an *alarm*, which points at a defect in the tool because the
implication itself is a theorem.

The checks are arranged so that, wherever possible, every quantity the
conclusion measures was already measured (as the same float) by a hypothesis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .norms import TwoNormSpace, Vector, eval_against
from .probes import (FuncFamilySpec, FuncSpec, ProbeReport, Witness, _anchor_points, _box, _check_map,
                     _image_gaps, _sample_pairs, combine_status, image_sequence, probe_sequential, probe_u_continuity,
                     probe_uniform_continuity, probe_ward, probe_ward_compact_image)
from .sequences import (FAIL, INCONCLUSIVE, PASS, SeqSpec, ToleranceSchedule, _direction_values, classify_cauchy,
                        classify_convergent, classify_quasi_cauchy, extract_quasi_cauchy_subsequence, interleave)

# finite stand-in for "every f_n" in uniform-limit hypotheses; the family
# window start is appended at run time
MEMBER_INDICES = (1, 2, 5, 10, 50)
DEFAULT_FAMILY_WINDOW = (200, 400)


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def box_samples(box, count: int, seed: int, dim: int) -> np.ndarray:
    """Seeded points in an axis-aligned box, with some snapped to vertices."""
    lo, hi = (np.asarray(b, dtype=float) for b in box)
    if lo.shape != (dim,) or hi.shape != (dim,):
        raise ValueError("box corners have the wrong dimension")
    return _anchor_points(np.random.default_rng(seed), lo, hi, count)


def _inside(seq: SeqSpec, sched: ToleranceSchedule, box) -> bool:
    lo, hi = (np.asarray(b, dtype=float) for b in box)
    xs = seq.terms(sched.start, sched.end + 1)
    return bool(np.all((xs >= lo) & (xs <= hi)))


def _apply(f, pts: np.ndarray) -> np.ndarray:
    return f.many(pts) if hasattr(f, "many") else np.array([f(tuple(p)) for p in pts.tolist()], dtype=float)


def _step_check(space: TwoNormSpace, f, seqs: Sequence[SeqSpec], sched: ToleranceSchedule,
                constraints: Sequence[tuple[Vector, float]], directions: Sequence[Vector],
                epsilon: float) -> ProbeReport:
    """A pair hypothesis evaluated on the steps ``(x_n, x_{n+1})`` of ``seqs``.

    Steps with ``||x_n - x_{n+1}, z|| < delta`` for every constraint must have
    ``||f(x_n) - f(x_{n+1}), d|| < epsilon`` for every direction d. Random
    pairs alone can miss a discontinuity that a sequence steps across.
    """
    statuses, witnesses, used = [], [], 0
    for seq in seqs:
        xs = seq.terms(sched.start, sched.end + 1)
        a, b = xs[:-1], xs[1:]
        keep = np.ones(len(a), dtype=bool)
        with np.errstate(over="ignore", invalid="ignore"):
            for z, d in constraints:
                keep &= eval_against(space, a - b, z) < d
        if not keep.any():
            continue
        gaps = _image_gaps(space, f, a[keep], b[keep], directions)
        used += int(keep.sum())
        if not np.isfinite(gaps).all():
            statuses.append(INCONCLUSIVE)
            continue
        k, j = np.unravel_index(int(np.argmax(gaps)), gaps.shape)
        worst = float(gaps[k, j])
        statuses.append(PASS if worst < epsilon else FAIL)
        if worst >= epsilon:
            n = sched.start + int(np.flatnonzero(keep)[k])
            witnesses.append(Witness(n, tuple(directions[j]), worst, seq.name, "sequence step"))
    return ProbeReport("step_pairs", combine_status(statuses) if statuses else PASS, witnesses,
                       {"epsilon": epsilon}, {"steps": used})


def _quarantine(name: str, f, preconditions: dict[str, str], params: dict, details: dict) -> ProbeReport:
    return ProbeReport(name, INCONCLUSIVE, [], {**params, "function": f.label},
                       {"preconditions": preconditions, "quarantined": True, "alarm": False, **details})


def _conclude(name: str, f, preconditions: dict[str, str], conclusions: Sequence[ProbeReport],
              params: dict, details: dict) -> ProbeReport:
    status = combine_status([c.status for c in conclusions])
    witnesses = [w for c in conclusions if c.status == FAIL for w in c.witnesses]
    return ProbeReport(name, status, witnesses, {**params, "function": f.label},
                       {"preconditions": preconditions, "quarantined": False, "alarm": status == FAIL,
                        "conclusion": [c.to_dict() for c in conclusions], **details})


def _verdict_report(probe: str, verdicts: Sequence[tuple[str, object]], params: dict) -> ProbeReport:
    """Fold per-sequence :class:`SeqVerdict` results into one report."""
    witnesses = [Witness(v.witness_index, v.witness_direction, v.worst_value, name)
                 for name, v in verdicts if v.status == FAIL]
    return ProbeReport(probe, combine_status([v.status for _, v in verdicts]), witnesses, params,
                       {"checked": {name: v.to_dict() for name, v in verdicts}})


# ---------------------------------------------------------------------------
# Uniform convergence of a function family
# ---------------------------------------------------------------------------

def check_uniform_convergence(space: TwoNormSpace, family: FuncFamilySpec, f: FuncSpec, domain_samples,
                              sched: ToleranceSchedule) -> ProbeReport:
    """Pass iff ``||f_n(x) - f(x), e_i|| < eps`` for every sample x, basis e_i and n in the window."""
    _check_map(space, f)
    _check_map(space, family.base)
    pts = np.asarray(domain_samples, dtype=float).reshape(-1, space.dim)
    if len(pts) == 0:
        raise ValueError("no domain samples")
    fx = _apply(f, pts)
    basis = tuple(space.basis)
    worst, where = -math.inf, None
    finite = True
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(sched.start, sched.end + 1):
            vals = _direction_values(space, family.member(n).many(pts) - fx, basis)
            if not np.isfinite(vals).all():
                finite = False
                break
            k, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
            if vals[k, j] > worst:
                worst, where = float(vals[k, j]), (n, int(k), int(j))
    params = {"window": list(sched.window), "epsilon": sched.epsilon, "samples": len(pts),
              "family": family.label, "function": f.label}
    if not finite:
        return ProbeReport("uniform_convergence", INCONCLUSIVE, [], params, {"worst_value": None})
    n, k, j = where
    status = PASS if worst < sched.epsilon else FAIL
    witnesses = [] if status == PASS else [Witness(tuple(pts[k].tolist()), basis[j], worst, None, f"n={n}")]
    return ProbeReport("uniform_convergence", status, witnesses, params, {"worst_value": worst, "worst_n": n})


# ---------------------------------------------------------------------------
# Uniform limits
# ---------------------------------------------------------------------------

def _members(family_sched: ToleranceSchedule, members) -> tuple[int, ...]:
    chosen = MEMBER_INDICES if members is None else tuple(members)
    return tuple(sorted(set(chosen) | {family_sched.start}))


def _decomposition(space: TwoNormSpace, family: FuncFamilySpec, f: FuncSpec, seqs: Sequence[SeqSpec],
                   sched: ToleranceSchedule, n: int, third: float) -> ProbeReport:
    """Measure the three summands bounding ``||f(x_{k+1}) - f(x_k), e_i||`` through ``f_n``.

    ``a = ||f(x_{k+1}) - f_n(x_{k+1})||``, ``b = ||f_n(x_{k+1}) - f_n(x_k)||``,
    ``c = ||f_n(x_k) - f(x_k)||``; each must stay below ``third``.
    """
    member = family.member(n)
    basis = tuple(space.basis)
    worst = {"a": 0.0, "b": 0.0, "c": 0.0}
    witnesses = []
    with np.errstate(over="ignore", invalid="ignore"):
        for seq in seqs:
            xs = seq.terms(sched.start, sched.end + 1)
            fx, gx = _apply(f, xs), member.many(xs)
            gap = _direction_values(space, gx - fx, basis)
            parts = {"a": gap[1:], "b": _direction_values(space, gx[1:] - gx[:-1], basis), "c": gap[:-1]}
            for key, vals in parts.items():
                top = float(np.max(vals)) if np.isfinite(vals).all() else math.inf
                worst[key] = max(worst[key], top)
                if not top < third:
                    k, j = np.unravel_index(int(np.argmax(np.where(np.isfinite(vals), vals, np.inf))), vals.shape)
                    witnesses.append(Witness(sched.start + int(k), basis[j], top, seq.name, f"summand {key}"))
    status = PASS if not witnesses else FAIL
    return ProbeReport("epsilon_thirds", status, witnesses,
                       {"n": n, "bound": third, "window": list(sched.window)}, {"worst": worst})


def verify_uniform_limit_ward(space: TwoNormSpace, family: FuncFamilySpec, f: FuncSpec, seq_battery: Sequence[SeqSpec],
                              sched: ToleranceSchedule, family_sched: ToleranceSchedule | None = None,
                              members: Sequence[int] | None = None,
                              image_epsilon: float | None = None) -> ProbeReport:
    """Uniform limits of ward continuous maps are ward continuous.

    Hypotheses: ``f_n -> f`` uniformly at eps/3 on the set E of battery terms,
    and each chosen ``f_n`` passes the ward probe at image tolerance eps/3.
    Conclusion: ``f`` passes the ward probe at eps, and the three-term split
    of the bound through ``f_N`` (N = family window start) holds.
    """
    eps = image_epsilon if image_epsilon is not None else sched.epsilon
    third = eps / 3
    fam_sched = (family_sched or ToleranceSchedule(*DEFAULT_FAMILY_WINDOW, third)).with_epsilon(third)
    params = {"window": list(sched.window), "epsilon": sched.epsilon, "image_epsilon": eps,
              "family_window": list(fam_sched.window), "family": family.label}
    qualifying = [s for s in seq_battery if classify_quasi_cauchy(space, s, sched).status == PASS]
    if not qualifying:
        return _quarantine("theorem:uniform_limit_ward", f, {"battery": INCONCLUSIVE}, params, {})
    domain = np.vstack([s.terms(sched.start, sched.end + 1) for s in qualifying])
    pre = {"uniform_convergence": check_uniform_convergence(space, family, f, domain, fam_sched)}
    for n in _members(fam_sched, members):
        pre[f"ward[{n}]"] = probe_ward(space, family.member(n), qualifying, sched, image_epsilon=third)
    pre_status = {k: r.status for k, r in pre.items()}
    if any(s != PASS for s in pre_status.values()):
        return _quarantine("theorem:uniform_limit_ward", f, pre_status, params, {})
    conclusion = probe_ward(space, f, qualifying, sched, image_epsilon=eps)
    split = _decomposition(space, family, f, qualifying, sched, fam_sched.start, third)
    return _conclude("theorem:uniform_limit_ward", f, pre_status, [conclusion, split], params,
                     {"epsilon_thirds": split.details["worst"]})


def verify_uniform_limit_u(space: TwoNormSpace, family: FuncFamilySpec, f: FuncSpec, domain_box, epsilon: float,
                           delta_grid: Sequence[float], pair_samples: int = 2000, seed: int = 0,
                           family_sched: ToleranceSchedule | None = None, members: Sequence[int] | None = None,
                           domain_samples: int = 500) -> ProbeReport:
    """Uniform limits of u-continuous maps are u-continuous.

    Hypotheses: each chosen ``f_n`` passes the u-probe at eps/3; ``f_N``
    (N = family window start) yields the delta used below; ``f_n -> f``
    uniformly at eps/3 on box samples together with every sampled pair
    endpoint. Conclusion: ``f`` passes the u-probe at eps with that delta on
    the same pairs.
    """
    third = epsilon / 3
    fam_sched = (family_sched or ToleranceSchedule(*DEFAULT_FAMILY_WINDOW, third)).with_epsilon(third)
    params = {"epsilon": epsilon, "delta_grid": list(delta_grid), "pair_samples": pair_samples, "seed": seed,
              "family_window": list(fam_sched.window), "family": family.label}
    pre: dict[str, ProbeReport] = {}
    for n in _members(fam_sched, members):
        pre[f"u[{n}]"] = probe_u_continuity(space, family.member(n), domain_box, third, delta_grid,
                                            pair_samples, seed)
    anchor = pre[f"u[{fam_sched.start}]"]
    delta = anchor.details["largest_passing_delta"]
    if delta is not None:
        lo, hi = _box(space, domain_box)
        xs, ys = _sample_pairs(space, lo, hi, [(e, delta) for e in space.basis], pair_samples,
                               np.random.default_rng(seed))
        pts = np.vstack([box_samples(domain_box, domain_samples, seed, space.dim), xs, ys])
        pre["uniform_convergence"] = check_uniform_convergence(space, family, f, pts, fam_sched)
    pre_status = {k: r.status for k, r in pre.items()}
    if delta is None or any(s != PASS for s in pre_status.values()):
        return _quarantine("theorem:uniform_limit_u", f, pre_status, params, {})
    conclusion = probe_u_continuity(space, f, domain_box, epsilon, [delta], pair_samples, seed)
    return _conclude("theorem:uniform_limit_u", f, pre_status, [conclusion], params, {"delta": delta})


# ---------------------------------------------------------------------------
# Continuity implications
# ---------------------------------------------------------------------------

def check_ward_implies_sequential(space: TwoNormSpace, f, qc_seqs: Sequence[SeqSpec],
                                  conv_pairs: Sequence[tuple[SeqSpec, Vector]], sched: ToleranceSchedule,
                                  image_epsilon: float | None = None) -> ProbeReport:
    """Ward continuity implies sequential continuity.

    For a convergent ``(x_n) -> L`` the interleaving ``x_1, L, x_2, L, ...`` is
    quasi-Cauchy; ward continuity of ``f`` on it forces ``f(x_n) -> f(L)``.
    Hypothesis: the ward probe passes on the quasi-Cauchy battery and on the
    interleavings (window ``[2N-1, 2M]``). Conclusion: the sequential probe
    passes for the pairs whose interleaving qualified.
    """
    eta = image_epsilon if image_epsilon is not None else sched.epsilon
    params = {"window": list(sched.window), "epsilon": sched.epsilon, "image_epsilon": eta}
    doubled = sched.doubled()
    pairs = [(s, tuple(map(float, L))) for s, L in conv_pairs]
    woven = {id(s): interleave(s, L) for s, L in pairs}
    qualifying = [(s, L) for s, L in pairs
                  if classify_quasi_cauchy(space, woven[id(s)], doubled).status == PASS]
    if not qualifying:
        return _quarantine("theorem:ward_implies_sequential", f, {"interleavings": INCONCLUSIVE}, params, {})
    pre = {"ward[interleavings]": probe_ward(space, f, [woven[id(s)] for s, _ in qualifying], doubled, eta)}
    if qc_seqs:
        pre["ward[battery]"] = probe_ward(space, f, qc_seqs, sched, eta)
    pre_status = {k: (r.status if k != "ward[battery]" or r.details["checked"] else INCONCLUSIVE)
                  for k, r in pre.items()}
    if "ward[battery]" in pre_status and not pre["ward[battery]"].details["checked"]:
        pre_status.pop("ward[battery]")  # nothing in the battery qualified; the interleavings still decide
    if any(s != PASS for s in pre_status.values()):
        return _quarantine("theorem:ward_implies_sequential", f, pre_status, params, {})
    conclusion = probe_sequential(space, f, qualifying, sched, eta)
    return _conclude("theorem:ward_implies_sequential", f, pre_status, [conclusion], params,
                     {"pairs": [s.name for s, _ in qualifying]})


def check_u_implies_ward(space: TwoNormSpace, f, seqs: Sequence[SeqSpec], sched: ToleranceSchedule, domain_box,
                         epsilon: float, delta_grid: Sequence[float], pair_samples: int = 2000,
                         seed: int = 0) -> ProbeReport:
    """u-continuity on E implies ward continuity on E.

    Hypothesis: the u-probe passes; its largest passing delta ``d`` fixes the
    input tolerance, and the u-condition also holds on the steps of the
    sequences used below. Sequences inside the box whose window differences
    stay below ``d`` are then expected to have image differences below
    ``epsilon``.
    """
    params = {"window": list(sched.window), "epsilon": epsilon, "delta_grid": list(delta_grid),
              "pair_samples": pair_samples, "seed": seed}
    u = probe_u_continuity(space, f, domain_box, epsilon, delta_grid, pair_samples, seed)
    delta = u.details["largest_passing_delta"]
    if delta is None:
        return _quarantine("theorem:u_implies_ward", f, {"u_continuity": u.status}, params, {})
    inner = sched.with_epsilon(delta)
    qualifying = [s for s in seqs if _inside(s, sched, domain_box)
                  and classify_quasi_cauchy(space, s, inner).status == PASS]
    basis = tuple(space.basis)
    steps = _step_check(space, f, qualifying, sched, [(e, delta) for e in basis], basis, epsilon)
    pre_status = {"u_continuity": PASS, "u_continuity[steps]": steps.status,
                  "sequences": PASS if qualifying else INCONCLUSIVE}
    if any(v != PASS for v in pre_status.values()):
        return _quarantine("theorem:u_implies_ward", f, pre_status, params, {"delta": delta})
    conclusion = probe_ward(space, f, qualifying, inner, image_epsilon=epsilon)
    return _conclude("theorem:u_implies_ward", f, pre_status, [conclusion], params,
                     {"delta": delta, "sequences": [s.name for s in qualifying]})


def check_uniform_implies_ward(space: TwoNormSpace, f, seqs: Sequence[SeqSpec], sched: ToleranceSchedule,
                               domain_box, epsilon: float, w: Vector,
                               certificate: Sequence[tuple[Vector, float]], pair_samples: int = 2000,
                               seed: int = 0) -> ProbeReport:
    """Uniform continuity (certificate form) implies ward continuity, direction by direction.

    Hypothesis: the certificate ``{(z_k, delta_k)}`` for ``(epsilon, w)``
    passes the uniform-continuity probe, on random pairs and on the steps of
    the sequences used below. Sequences inside the box with
    ``||Delta x_n, z_k|| < delta_k`` on the window are expected to satisfy
    ``||Delta f(x_n), w|| < epsilon``.
    """
    w = tuple(map(float, w))
    cert = [(tuple(map(float, z)), float(d)) for z, d in certificate]
    params = {"window": list(sched.window), "epsilon": epsilon, "w": list(w),
              "certificate": [[list(z), d] for z, d in cert], "pair_samples": pair_samples, "seed": seed}
    pre = probe_uniform_continuity(space, f, domain_box, epsilon, w, cert, pair_samples, seed)
    if pre.status != PASS:
        return _quarantine("theorem:uniform_implies_ward", f, {"uniform_continuity": pre.status}, params, {})
    qualifying = [s for s in seqs if _inside(s, sched, domain_box)
                  and all(classify_quasi_cauchy(space, s, sched.with_epsilon(d), [z]).status == PASS
                          for z, d in cert)]
    steps = _step_check(space, f, qualifying, sched, cert, [w], epsilon)
    pre_status = {"uniform_continuity": PASS, "uniform_continuity[steps]": steps.status,
                  "sequences": PASS if qualifying else INCONCLUSIVE}
    if any(v != PASS for v in pre_status.values()):
        return _quarantine("theorem:uniform_implies_ward", f, pre_status, params, {})
    img = sched.with_epsilon(epsilon)
    verdicts = [(s.name, classify_quasi_cauchy(space, image_sequence(f, s), img, [w])) for s in qualifying]
    conclusion = _verdict_report("ward_direction", verdicts, {"direction": list(w), "epsilon": epsilon})
    return _conclude("theorem:uniform_implies_ward", f, pre_status, [conclusion], params,
                     {"sequences": [s.name for s in qualifying]})


def check_ward_compact_image(space: TwoNormSpace, f, seqs: Sequence[SeqSpec], sched: ToleranceSchedule,
                             bound: float, image_bound: float, image_epsilon: float | None = None) -> ProbeReport:
    """Ward continuous images of ward compact sets are ward compact.

    Hypotheses: every input sequence admits a quasi-Cauchy subsequence in the
    window (bisection extraction), and ``f`` passes the ward probe on the
    battery and on those subsequences. Conclusion: every image sequence
    admits a quasi-Cauchy subsequence, found by bisecting the images or,
    failing that, as the image of the extracted input subsequence.
    """
    eta = image_epsilon if image_epsilon is not None else sched.epsilon
    params = {"window": list(sched.window), "epsilon": sched.epsilon, "image_epsilon": eta,
              "bound": bound, "image_bound": image_bound}
    extracted = {s.name: extract_quasi_cauchy_subsequence(space, s, sched, bound) for s in seqs}
    pre_status = {"compact": PASS if all(v is not None for v in extracted.values()) else FAIL}
    if pre_status["compact"] != PASS:
        return _quarantine("theorem:ward_compact_image", f, pre_status, params, {})
    subs = {s.name: SeqSpec.from_terms(s.terms(sched.start, sched.end)[np.array(extracted[s.name]) - sched.start],
                                       label=f"{s.name}[extracted]") for s in seqs}
    sub_sched = {name: ToleranceSchedule(1, max(len(sub.source.items) - 1, 1), sched.epsilon)
                 for name, sub in subs.items() if len(sub.source.items) >= 12}
    ward = probe_ward(space, f, seqs, sched, eta)
    pre_status["ward"] = ward.status if ward.details["checked"] else INCONCLUSIVE
    for name, sub_s in sub_sched.items():
        rep = probe_ward(space, f, [subs[name]], sub_s, eta)
        pre_status[f"ward[{name}]"] = rep.status
    if any(v != PASS for v in pre_status.values()):
        return _quarantine("theorem:ward_compact_image", f, pre_status, params, {})
    found = probe_ward_compact_image(space, f, seqs, sched.with_epsilon(eta), image_bound)
    fallback = {}
    if found.status != PASS:
        missed = [w.sequence for w in found.witnesses]
        for name in missed:
            if name in sub_sched:
                img = image_sequence(f, subs[name])
                fallback[name] = classify_quasi_cauchy(space, img, sub_sched[name].with_epsilon(eta)).status
        if missed and all(fallback.get(n) == PASS for n in missed):
            found = ProbeReport(found.probe, PASS, [], found.params,
                                {**found.details, "via_input_subsequence": sorted(missed)})
    return _conclude("theorem:ward_compact_image", f, pre_status, [found], params,
                     {"subsequence_lengths": {k: (None if v is None else len(v)) for k, v in extracted.items()}})


# ---------------------------------------------------------------------------
# Implication lattice
# ---------------------------------------------------------------------------

PROPERTIES = {
    "1": "quasi-Cauchy -> quasi-Cauchy",
    "2": "quasi-Cauchy -> convergent",
    "3": "convergent -> convergent",
    "4": "convergent -> quasi-Cauchy",
}
IMPLICATIONS = (("2", "1"), ("1", "4"), ("2", "3"), ("3", "4"))


@dataclass(frozen=True)
class Battery:
    quasi_cauchy: tuple[SeqSpec, ...] = ()
    convergent: tuple[tuple[SeqSpec, Vector], ...] = ()


@dataclass
class LatticeVerdict:
    function: str
    verdicts: dict[str, str]
    consistent: bool
    violations: list[str] = field(default_factory=list)
    evidence: dict = field(default_factory=dict)

    @property
    def vector(self) -> tuple[str, str, str, str]:
        return tuple(self.verdicts[k] for k in "1234")

    def report(self) -> ProbeReport:
        witnesses = [Witness(None, (), math.nan, None, f"({a}) holds but ({b}) fails") for a, b in
                     (v.split("=>") for v in self.violations)]
        return ProbeReport("implication_matrix", PASS if self.consistent else FAIL, witnesses,
                           {"function": self.function},
                           {"verdicts": self.verdicts, "consistent": self.consistent,
                            "violations": self.violations, "evidence": self.evidence})


def run_implication_matrix(space: TwoNormSpace, f, batteries: Battery, sched: ToleranceSchedule,
                           image_epsilon: float | None = None) -> LatticeVerdict:
    """Evaluate properties (1)-(4) on finite windows and check them against the lattice.

    With input tolerance eps and image tolerance eta:

    * C: battery pairs ``(x_n) -> L`` convergent at eps on ``[N, M+1]`` and
      quasi-Cauchy at eps on ``[N, M]``, together with their interleavings
      ``x_1, L, x_2, L, ...`` (windows ``[2N-1, 2M+2]`` and ``[2N-1, 2M+1]``).
    * Q: quasi-Cauchy battery and every convergent-battery sequence on
      ``[N, M]`` plus the interleavings in C, kept when quasi-Cauchy at eps.
    * (1) images of Q quasi-Cauchy at eta; (2) images of Q Cauchy at eta on
      the window extended by one (the finite stand-in for convergence);
      (3) images of C converge to ``f(L)`` at eta; (4) images of C
      quasi-Cauchy at 2 eta.

    These choices make every implication of the lattice hold on the measured
    floats, so an inconsistent vector exposes a bug rather than a tolerance
    artefact. ``(4) => (3)`` is not checked.
    """
    _check_map(space, f)
    eta = image_epsilon if image_epsilon is not None else sched.epsilon
    eps = sched.epsilon
    longer = ToleranceSchedule(sched.start, sched.end + 1, eps)
    woven_conv = ToleranceSchedule(2 * sched.start - 1, 2 * sched.end + 2, eps)
    woven_qc = ToleranceSchedule(2 * sched.start - 1, 2 * sched.end + 1, eps)

    # (sequence, limit, convergence window, quasi-Cauchy window)
    conv = []
    for s, L in batteries.convergent:
        L = tuple(map(float, L))
        if (classify_convergent(space, s, L, longer).status == PASS
                and classify_quasi_cauchy(space, s, sched).status == PASS):
            conv.append((s, L, longer, sched))
    for s, L, _, _ in list(conv):
        t = interleave(s, L)
        if (classify_convergent(space, t, L, woven_conv).status == PASS
                and classify_quasi_cauchy(space, t, woven_qc).status == PASS):
            conv.append((t, L, woven_conv, woven_qc))
    candidates = [(s, sched) for s in batteries.quasi_cauchy]
    candidates += [(s, sched) for s, _ in batteries.convergent]
    candidates += [(t, qsc) for t, _, _, qsc in conv if qsc is woven_qc]
    qual = [(s, sc) for s, sc in candidates if classify_quasi_cauchy(space, s, sc).status == PASS]

    p1, p2, p3, p4 = [], [], [], []
    for s, sc in qual:
        img = image_sequence(f, s)
        p1.append((img.name, classify_quasi_cauchy(space, img, sc.with_epsilon(eta))))
        p2.append((img.name, classify_cauchy(space, img, ToleranceSchedule(sc.start, sc.end + 1, eta))))
    for s, L, csc, qsc in conv:
        img = image_sequence(f, s)
        target = f(L)
        if all(math.isfinite(c) for c in target):
            p3.append((img.name, classify_convergent(space, img, target, csc.with_epsilon(eta))))
        else:
            p3.append((img.name, None))
        p4.append((img.name, classify_quasi_cauchy(space, img, qsc.with_epsilon(2 * eta))))

    def fold(results):
        return combine_status([INCONCLUSIVE if v is None else v.status for _, v in results])

    verdicts = {"1": fold(p1), "2": fold(p2), "3": fold(p3), "4": fold(p4)}
    violations = [f"{a}=>{b}" for a, b in IMPLICATIONS if verdicts[a] == PASS and verdicts[b] == FAIL]
    evidence = {
        key: {name: (None if v is None else {"status": v.status, "worst_value": v.worst_value})
              for name, v in results}
        for key, results in (("1", p1), ("2", p2), ("3", p3), ("4", p4))
    }
    return LatticeVerdict(f.label, verdicts, not violations, violations, evidence)
