"""Brute-force verification of the bound results.

Selection tables are handled here as ``(n, 4)`` float arrays whose columns
follow the canonical cell order ``d1e1, d1e0, d0e1, d0e0``.  Hypotheses are
checked by vectorized code written independently of :mod:`biasbound.classify`;
conclusions are checked through ``Inter_RR`` alone, which by the odds-ratio
decomposition is equivalent to the odds-ratio inequality.

Reproducibility: uniform sampling splits the candidate stream into fixed-size
chunks and seeds chunk ``k`` from ``SeedSequence(seed, spawn_key=(k,))``.
Chunks are concatenated in index order whatever the number of workers, so a
``(config, seed)`` pair always yields the same tables.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

from .errors import (DegenerateSampleError, SamplerExhaustedError,
                     ValidationError)
from .measures import (LinearParams, LogisticParams, SelectionModel,
                       TargetJoint, expit, inter_rr)

EPS = 1e-6
CHUNK_SIZE = 1 << 15
MAX_ATTEMPTS = 10_000_000
#: tolerance on the Inter_RR conclusion
CONCLUSION_TOL = 1e-9
DEFAULT_TOL = 1e-9

RESULT_IDS = ("R1", "R2a", "R2b", "R3a", "R3b",
              "R4a-RR", "R4a-OR", "R4a-RD", "R4b-RR", "R4b-OR", "R4b-RD")
CONSTRAINTS = ("none",) + RESULT_IDS

# constraint -> (interaction scale, interaction requirement, monotonicity)
# requirement: "zero" (enforced by construction), "le" / "ge" relative to no
# interaction; monotonicity: "same", "opposite" or None
_HYPOTHESES = {
    "R1": ("rr", "zero", None),
    "R2a": ("or", "zero", "same"),
    "R2b": ("or", "zero", "opposite"),
    "R3a": ("rd", "zero", "same"),
    "R3b": ("rd", "zero", "opposite"),
    "R4a-RR": ("rr", "le", "same"),
    "R4a-OR": ("or", "le", "same"),
    "R4a-RD": ("rd", "le", "same"),
    "R4b-RR": ("rr", "ge", "opposite"),
    "R4b-OR": ("or", "ge", "opposite"),
    "R4b-RD": ("rd", "ge", "opposite"),
}


def _conclusion_kind(result_id: str) -> str:
    if result_id == "R1":
        return "equal"
    return "lower" if result_id[2] == "a" else "upper"


@dataclass(frozen=True)
class SamplerConfig:
    mode: str = "uniform"
    count: int = 1000
    resolution: int = 5
    seed: int = 0
    constraint: str = "none"
    tol: float = DEFAULT_TOL
    workers: int = 1

    def __post_init__(self):
        if self.mode not in ("uniform", "grid"):
            raise ValidationError(f"unknown sampler mode {self.mode!r}",
                                  code="unknown_value", field="mode")
        if self.mode == "uniform" and self.count < 1:
            raise ValidationError("count must be >= 1", code="bad_count",
                                  field="count")
        if self.mode == "grid" and self.resolution < 2:
            raise ValidationError("grid resolution must be >= 2",
                                  code="bad_resolution", field="resolution")
        if self.constraint not in CONSTRAINTS:
            raise ValidationError(f"unknown constraint {self.constraint!r}",
                                  code="unknown_value", field="constraint")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1", code="bad_workers",
                                  field="workers")


@dataclass
class VerificationReport:
    result_id: str
    models_tested: int
    models_satisfying_conditions: int
    violations: int
    first_violation: SelectionModel | None
    first_violation_index: int | None
    seed: int
    constraint: str
    max_excess: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        fv = self.first_violation
        return {
            "result_id": self.result_id,
            "constraint": self.constraint,
            "seed": self.seed,
            "models_tested": self.models_tested,
            "models_satisfying_conditions": self.models_satisfying_conditions,
            "violations": self.violations,
            "passed": self.passed,
            "max_excess": self.max_excess,
            "first_violation_index": self.first_violation_index,
            "first_violation": None if fv is None else list(fv.cells()),
        }


# -- vectorized measures ---------------------------------------------------
# Same operation order as the scalar versions in measures.py so that the
# vectorized and scalar paths agree bit for bit.

def inter_rr_v(x: np.ndarray) -> np.ndarray:
    return (x[:, 0] * x[:, 3]) / (x[:, 1] * x[:, 2])


def inter_or_v(x: np.ndarray) -> np.ndarray:
    odds = x / (1.0 - x)
    return (odds[:, 0] * odds[:, 3]) / (odds[:, 1] * odds[:, 2])


def inter_rd_v(x: np.ndarray) -> np.ndarray:
    return (x[:, 0] - x[:, 1]) - (x[:, 2] - x[:, 3])


def _contrast_v(x: np.ndarray, scale: str) -> np.ndarray:
    if scale == "rr":
        return inter_rr_v(x) - 1.0
    if scale == "or":
        return inter_or_v(x) - 1.0
    return inter_rd_v(x)


def _signs_v(x: np.ndarray, tol: float):
    """Boolean (non_decreasing, non_increasing, flat) triples for d and e."""
    d_diffs = np.stack([x[:, 0] - x[:, 2], x[:, 1] - x[:, 3]])
    e_diffs = np.stack([x[:, 0] - x[:, 1], x[:, 2] - x[:, 3]])
    out = []
    for diffs in (d_diffs, e_diffs):
        out.append(((diffs >= -tol).all(axis=0), (diffs <= tol).all(axis=0),
                    (np.abs(diffs) <= tol).all(axis=0)))
    return out


def monotonicity_v(x: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """(same_direction, opposite_direction) masks; Flat pairs with anything."""
    (nd_d, ni_d, fl_d), (nd_e, ni_e, fl_e) = _signs_v(x, tol)
    flat = fl_d | fl_e
    same = flat | (nd_d & nd_e) | (ni_d & ni_e)
    opposite = flat | (nd_d & ni_e) | (ni_d & nd_e)
    return same, opposite


def hypotheses_v(x: np.ndarray, result_id: str, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Mask of tables satisfying the hypotheses of ``result_id``."""
    scale, req, mono = _HYPOTHESES[result_id]
    c = _contrast_v(x, scale)
    if req == "zero":
        mask = np.abs(c) <= tol
    elif req == "le":
        mask = c <= tol
    else:
        mask = c >= -tol
    if mono is not None:
        same, opposite = monotonicity_v(x, tol)
        mask &= same if mono == "same" else opposite
    return mask


def conclusion_v(x: np.ndarray, result_id: str,
                 tol: float = CONCLUSION_TOL) -> tuple[np.ndarray, np.ndarray]:
    """(holds mask, excess) for the conclusion of ``result_id``.

    ``excess`` is how far Inter_RR lies beyond the claimed bound (<= 0 when
    the conclusion holds exactly).
    """
    rr = inter_rr_v(x)
    kind = _conclusion_kind(result_id)
    if kind == "equal":
        excess = np.abs(rr - 1.0)
    elif kind == "lower":
        excess = rr - 1.0
    else:
        excess = 1.0 - rr
    return excess <= tol, excess


# -- sampling ----------------------------------------------------------------

def _solve_zero_interaction(free: np.ndarray, scale: str) -> np.ndarray:
    """Complete ``(d1e0, d0e1, d0e0)`` with the d1e1 cell giving no interaction."""
    b, c, d = free[:, 0], free[:, 1], free[:, 2]
    if scale == "rr":
        a = b * c / d
    elif scale == "rd":
        a = b + c - d
    else:
        lg = np.log(b) - np.log1p(-b) + np.log(c) - np.log1p(-c) \
            - (np.log(d) - np.log1p(-d))
        a = 1.0 / (1.0 + np.exp(-lg))
    return np.column_stack([a, b, c, d])


def _filter(x: np.ndarray, constraint: str, tol: float) -> np.ndarray:
    if constraint == "none":
        return x
    inside = ((x > EPS) & (x < 1.0 - EPS)).all(axis=1)
    x = x[inside]
    return x[hypotheses_v(x, constraint, tol)]


def _candidates(u: np.ndarray, constraint: str) -> np.ndarray:
    """Map uniforms on (EPS, 1-EPS) to candidate tables."""
    if constraint != "none" and _HYPOTHESES[constraint][1] == "zero":
        return _solve_zero_interaction(u[:, 1:], _HYPOTHESES[constraint][0])
    return u


def _chunk(seed: int, index: int, constraint: str, tol: float) -> np.ndarray:
    ss = np.random.SeedSequence(seed & 0xFFFFFFFFFFFFFFFF, spawn_key=(index,))
    rng = np.random.default_rng(ss)
    u = EPS + (1.0 - 2.0 * EPS) * rng.random((CHUNK_SIZE, 4))
    return _filter(_candidates(u, constraint), constraint, tol)


def sample_array(cfg: SamplerConfig) -> np.ndarray:
    """Selection tables for ``cfg`` as an ``(n, 4)`` array."""
    if cfg.mode == "grid":
        return _grid(cfg)
    parts, have, attempts, index = [], 0, 0, 0
    pool = ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        while have < cfg.count:
            if attempts >= MAX_ATTEMPTS:
                raise SamplerExhaustedError(
                    f"constraint {cfg.constraint!r}: only {have} of {cfg.count} "
                    f"tables after {attempts} candidates")
            wave = range(index, index + cfg.workers)
            args = [(cfg.seed, k, cfg.constraint, cfg.tol) for k in wave]
            if pool is None:
                results = [_chunk(*a) for a in args]
            else:
                results = list(pool.map(lambda a: _chunk(*a), args))
            for r in results:
                if have >= cfg.count:
                    break
                parts.append(r)
                have += len(r)
                attempts += CHUNK_SIZE
            index += cfg.workers
    finally:
        if pool is not None:
            pool.shutdown()
    return np.concatenate(parts)[:cfg.count]


def _grid(cfg: SamplerConfig) -> np.ndarray:
    values = np.arange(1, cfg.resolution + 1) / (cfg.resolution + 1)
    zero = cfg.constraint != "none" and _HYPOTHESES[cfg.constraint][1] == "zero"
    k = 3 if zero else 4
    mesh = np.stack(np.meshgrid(*([values] * k), indexing="ij"), axis=-1)
    x = mesh.reshape(-1, k)
    if zero:
        x = _solve_zero_interaction(x, _HYPOTHESES[cfg.constraint][0])
    return _filter(x, cfg.constraint, cfg.tol)


def sample_models(cfg: SamplerConfig) -> Iterator[SelectionModel]:
    """Selection models for ``cfg``; deterministic given the seed."""
    for row in sample_array(cfg):
        yield SelectionModel(*map(float, row))


# -- verification ------------------------------------------------------------

def verify_array(result_id: str, x: np.ndarray, *, seed: int = 0,
                 constraint: str | None = None,
                 tol: float = DEFAULT_TOL) -> VerificationReport:
    """Check the conclusion of ``result_id`` on every table meeting its hypotheses."""
    if result_id not in _HYPOTHESES:
        raise ValidationError(f"unknown result id {result_id!r}",
                              code="unknown_value", field="result")
    satisfied = hypotheses_v(x, result_id, tol)
    holds, excess = conclusion_v(x, result_id)
    bad = np.flatnonzero(satisfied & ~holds)
    first = None
    if len(bad):
        first = SelectionModel(*map(float, x[bad[0]]))
    max_excess = float(excess[satisfied].max()) if satisfied.any() else 0.0
    return VerificationReport(
        result_id=result_id,
        models_tested=len(x),
        models_satisfying_conditions=int(satisfied.sum()),
        violations=len(bad),
        first_violation=first,
        first_violation_index=int(bad[0]) if len(bad) else None,
        seed=seed,
        constraint=constraint if constraint is not None else result_id,
        max_excess=max_excess,
    )


def verify_result(result_id: str, cfg: SamplerConfig) -> VerificationReport:
    """Sample models and count violations of the conclusion of ``result_id``.

    With ``cfg.constraint == "none"`` the models are drawn unconstrained and
    only those satisfying the hypotheses are checked; any other constraint is
    replaced by ``result_id`` itself so every sampled model is checked.
    """
    if result_id not in _HYPOTHESES:
        raise ValidationError(f"unknown result id {result_id!r}",
                              code="unknown_value", field="result")
    if cfg.constraint != "none":
        cfg = replace(cfg, constraint=result_id)
    x = sample_array(cfg)
    return verify_array(result_id, x, seed=cfg.seed, constraint=cfg.constraint,
                        tol=cfg.tol)


def _witness_hypotheses(x: np.ndarray, result_id: str, tol: float) -> np.ndarray:
    if result_id == "R1":
        # collapsibility: pi constant in d or constant in e
        (_, _, fl_d), (_, _, fl_e) = _signs_v(x, tol)
        return fl_d | fl_e
    return hypotheses_v(x, result_id, tol)


def search(result_id: str, cfg: SamplerConfig, *, hypotheses: bool,
           conclusion: bool) -> SelectionModel | None:
    """First sampled model whose hypothesis / conclusion status matches.

    ``hypotheses=False, conclusion=True`` looks for a non-necessity witness;
    ``hypotheses=True, conclusion=False`` looks for a counterexample.  For R1
    the hypotheses are the collapsibility conditions.
    """
    if result_id not in _HYPOTHESES:
        raise ValidationError(f"unknown result id {result_id!r}",
                              code="unknown_value", field="result")
    x = sample_array(cfg)
    h = _witness_hypotheses(x, result_id, cfg.tol)
    c, _ = conclusion_v(x, result_id)
    hit = np.flatnonzero((h == hypotheses) & (c == conclusion))
    if not len(hit):
        return None
    return SelectionModel(*map(float, x[hit[0]]))


def find_nonnecessity_witness(result_id: str, cfg: SamplerConfig
                              ) -> SelectionModel | None:
    """A model that violates the hypotheses of ``result_id`` yet meets its conclusion.

    For R1 the conclusion ``Inter_RR = 1`` has measure zero, so an
    unconstrained config is swapped for the R1 construction.
    """
    if result_id == "R1" and cfg.constraint == "none":
        cfg = replace(cfg, constraint="R1")
    return search(result_id, cfg, hypotheses=False, conclusion=True)


def explore_open_region(scale: str, cfg: SamplerConfig) -> dict:
    """Tabulate Inter_RR where no general result applies.

    Region: positive interaction on ``scale`` with same-direction
    monotonicity.  Nothing is asserted; the counts only describe what the
    sampled tables do.
    """
    scale = scale.lower()
    if scale not in ("rr", "or", "rd"):
        raise ValidationError(f"unknown scale {scale!r}", code="unknown_scale",
                              field="scale")
    x = sample_array(replace(cfg, constraint="none"))
    same, _ = monotonicity_v(x, cfg.tol)
    region = same & (_contrast_v(x, scale) > cfg.tol)
    rr = inter_rr_v(x[region])
    return {
        "scale": scale,
        "models_tested": len(x),
        "models_in_region": int(region.sum()),
        "inter_rr_below_1": int((rr < 1.0).sum()),
        "inter_rr_above_1": int((rr > 1.0).sum()),
        "inter_rr_min": float(rr.min()) if len(rr) else None,
        "inter_rr_max": float(rr.max()) if len(rr) else None,
    }


# -- algebraic identities ----------------------------------------------------

@dataclass(frozen=True)
class IdentityCheck:
    passed: bool
    residual: float
    lhs: float
    rhs: float
    applicable: bool = True


def _logistic_terms(b: LogisticParams) -> tuple[float, float]:
    """``(A', B')`` = products of the diagonal and off-diagonal selection probabilities."""
    b0, b1, b2, b3 = b
    a = expit(b0) * expit(b0 + b1 + b2 + b3)
    bb = expit(b0 + b1) * expit(b0 + b2)
    return a, bb


def check_logistic_identity(b: LogisticParams, tol: float = 1e-12) -> IdentityCheck:
    """Check the logistic-scale algebra behind the OR-scale results.

    With ``beta3 == 0`` the identity
    ``1/A - 1/B = exp(-b0) (1 - exp(-b1)) (1 - exp(-b2))`` must hold; the
    residual is relative to ``max(1, 1/A, 1/B)`` because both sides are
    differences of terms of that size.  With ``beta3 != 0`` the sign of
    ``1/A' - 1/B'`` is checked where the hypotheses apply.
    """
    b = LogisticParams(*map(float, b))
    if not all(math.isfinite(v) for v in b):
        raise ValidationError("logistic parameters must be finite",
                              code="not_finite")
    a, bb = _logistic_terms(b)
    lhs = 1.0 / a - 1.0 / bb
    scale = max(1.0, 1.0 / a, 1.0 / bb)
    b0, b1, b2, b3 = b
    if b3 == 0.0:
        rhs = math.exp(-b0) * (-math.expm1(-b1)) * (-math.expm1(-b2))
        residual = abs(lhs - rhs) / scale
        return IdentityCheck(residual <= tol, residual, lhs, rhs)
    if b3 < 0 and b1 * b2 >= 0:
        excess = -lhs / scale
    elif b3 > 0 and b1 * b2 <= 0:
        excess = lhs / scale
    else:
        return IdentityCheck(True, 0.0, lhs, 0.0, applicable=False)
    return IdentityCheck(excess <= tol, max(excess, 0.0), lhs, 0.0)


def check_linear_identity(g: LinearParams, tol: float = 1e-12) -> IdentityCheck:
    """Check ``Inter_RR = 1 - g1 g2 / D + g0 g3 / D`` with ``D = (g0+g1)(g0+g2)``.

    The left side is computed from the selection table the parameters
    define; the residual is relative to ``max(1, |rhs|)``.
    """
    g = LinearParams(*map(float, g))
    g0, g1, g2, g3 = g
    denom = (g0 + g1) * (g0 + g2)
    if g0 + g1 <= 0 or g0 + g2 <= 0:
        raise DegenerateSampleError(
            "linear identity needs g0+g1 > 0 and g0+g2 > 0")
    lhs = inter_rr(g.to_selection())
    rhs = 1.0 - g1 * g2 / denom + g0 * g3 / denom
    residual = abs(lhs - rhs) / max(1.0, abs(rhs))
    return IdentityCheck(residual <= tol, residual, lhs, rhs)


# -- finite-sample simulation ------------------------------------------------

@dataclass(frozen=True)
class StudySimulation:
    counts: np.ndarray  # [e, d, s]
    empirical_selected_or: float
    n: int
    seed: int

    def selected_counts(self) -> tuple[int, int, int, int]:
        """S=1 counts in canonical cell order."""
        c = self.counts[:, :, 1]
        return (int(c[1, 1]), int(c[0, 1]), int(c[1, 0]), int(c[0, 0]))


def simulate_study(target: TargetJoint, sel: SelectionModel, n: int,
                   seed: int = 0) -> StudySimulation:
    """Draw ``n`` individuals from ``target``, select each with ``pi(d, e)``.

    The (E, D) cells are drawn jointly as a multinomial and selection as a
    binomial within each cell, which has the same law as drawing the
    individuals one by one.
    """
    if n < 1:
        raise ValidationError("n must be >= 1", code="bad_count", field="n")
    rng = np.random.default_rng(np.random.SeedSequence(seed & 0xFFFFFFFFFFFFFFFF))
    cells = [(1, 1), (1, 0), (0, 1), (0, 0)]  # (d, e)
    probs = np.array([float(p) for p in target.cells()])
    drawn = rng.multinomial(n, probs / probs.sum())
    counts = np.zeros((2, 2, 2), dtype=np.int64)
    for (d, e), m, pi in zip(cells, drawn, sel.cells()):
        s = rng.binomial(m, float(pi))
        counts[e, d, 1] = s
        counts[e, d, 0] = m - s
    sc = counts[:, :, 1]
    if (sc == 0).any():
        raise DegenerateSampleError(
            "a selected (E, D) cell is empty; increase n")
    emp = (sc[1, 1] * sc[0, 0]) / (sc[0, 1] * sc[1, 0])
    return StudySimulation(counts, float(emp), n, seed)
