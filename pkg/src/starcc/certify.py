"""Branch-and-bound certification of the region inequalities and the
Krawczyk local-uniqueness certificate around the regular pentagon.

The batch engine evaluates a region's planned check over whole arrays of
boxes at once (VInterval lanes).  Each lane produces a certified lower
bound for the planned quantity:

* pair checks: the gap lambda_high - lambda_low.  When both denominators
  q are bounded away from zero the quotient form N/q is used; when a q
  encloses zero (boxes touching the r3 = 0 edge, or the q22 = 0 closure
  corner of J8) the engine switches to the cleared-denominator form
  (N_high q_low - N_low q_high) * sign(q_low q_high), whose positivity is
  equivalent to the gap's on the open region where the q signs are fixed.
* the J16 middle band: a bound on |y1| away from zero.

Lanes whose distance enclosures touch zero (possible only for boxes
hanging over a collision corner of the closure) are marked undecidable
and bisected.  Boxes with certified bound > 0 become certificate leaves;
the rest are bisected along their wider side, children certainly outside
the region closure are dropped, and the loop continues until done or the
depth budget runs out.  A box whose certified *upper* bound is negative
(with its center inside the region) disproves the inequality outright
and aborts with CertificationRefuted — this is what the reversed-
orientation negative control exercises.

Certificates serialize every leaf with float.hex() endpoints so that
verification can recompute each bound bit-for-bit.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import kernel
from .forces import residual_vector
from .geometry import DomainError
from .intervals import (
    Box2,
    Dual,
    DualBackend,
    Interval,
    VectorBackend,
    VInterval,
    dual_vars,
    pentagon_constants,
    thin,
)
from .regions import (
    DELTA_B0,
    REGION_IDS,
    TRUNCATION_R5,
    NonvanishingY1Check,
    PairCheck,
    RegionPlan,
    cover_arrays,
    region_def,
    region_excises_b0,
    region_plan,
)

FORMAT_VERSION = "starcc-certificate/1"

FORM_QUOTIENT = "q"
FORM_CLEARED = "c"
FORM_Y1_NEG = "y-"
FORM_Y1_POS = "y+"
FORM_UNDECIDED = "?"


class BudgetExhausted(RuntimeError):
    """The bisection budget ran out with boxes still unresolved."""


class CertificationRefuted(RuntimeError):
    """A box inside the region has a certified negative gap."""


class ContractionFailure(RuntimeError):
    """The Krawczyk image is not strictly inside the window (or the
    Jacobian enclosure is singular, or the center residual too large)."""


class MalformedCertificate(ValueError):
    """Structurally invalid certificate, or one issued by a different
    build/plan than this verifier."""


class LeafBoundViolation(ValueError):
    """A stored leaf bound does not match its bit-exact recomputation or
    is not strictly positive."""


class CoverageGap(ValueError):
    """A sampled region point is outside every leaf and the excision."""


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------


@dataclass
class RunConfig:
    """Knobs shared by the CLI and certify_all."""

    max_box_width: float = 0.02
    delta_b0: float = DELTA_B0
    truncation: float = TRUNCATION_R5
    max_depth: int = 48
    threads: int = 4
    seed: int = 0
    output_dir: Optional[str] = None
    spread_tol: float = 1e-12
    y1_tol: float = 1e-13
    posteriori_tol: float = 1e-10

    def validate(self) -> "RunConfig":
        # delta_b0 = 0 is allowed on purpose: it disables the B0 excision,
        # which is the standard way to demonstrate that certification must
        # then fail next to the solution at (1,1).
        if not (0.0 <= self.delta_b0 < 0.5):
            raise ValueError(f"delta_b0 {self.delta_b0} outside [0, 0.5)")
        if not (0.0 < self.max_box_width <= 0.5):
            raise ValueError(f"max_box_width {self.max_box_width} outside (0, 0.5]")
        if self.truncation <= 1.0 + self.max_box_width:
            raise ValueError(f"truncation {self.truncation} too small")
        if self.max_depth < 0 or self.threads < 1:
            raise ValueError("max_depth must be >= 0 and threads >= 1")
        return self


# ---------------------------------------------------------------------------
# Batch bound engine
# ---------------------------------------------------------------------------


class _MaskedBackend(VectorBackend):
    """VectorBackend that records lanes whose squared-distance enclosure
    touches zero instead of raising, substituting a harmless [1,1]."""

    def __init__(self, n: int):
        super().__init__()
        self.bad = np.zeros(n, dtype=bool)

    def powneg32(self, x: VInterval) -> VInterval:  # type: ignore[override]
        bad = x.lo <= 0.0
        if np.any(bad):
            self.bad = self.bad | bad
            x = VInterval(np.where(bad, 1.0, x.lo), np.where(bad, 1.0, x.hi))
        return x.powneg32()


def _broadcast(v: VInterval, n: int) -> VInterval:
    return VInterval(np.broadcast_to(v.lo, (n,)), np.broadcast_to(v.hi, (n,)))


def _pair_bounds(check: PairCheck, lo3, hi3, lo5, hi5):
    """Certified (lower, upper) bounds of the gap and the form used,
    per lane; NaN bounds mark undecidable lanes."""
    n = lo3.size
    eng = _MaskedBackend(n)
    radii = kernel.derived_radii(eng, VInterval(lo3, hi3), VInterval(lo5, hi5))
    cache: dict = {}
    n_lo = kernel.lambda_num(eng, radii, *check.low, d2cache=cache)
    n_hi = kernel.lambda_num(eng, radii, *check.high, d2cache=cache)
    q_lo = _broadcast(kernel.lambda_den(eng, radii, *check.low), n)
    q_hi = _broadcast(kernel.lambda_den(eng, radii, *check.high), n)

    straddle = q_lo.straddles_zero() | q_hi.straddles_zero()
    safe_lo = VInterval(
        np.where(straddle, 1.0, q_lo.lo), np.where(straddle, 1.0, q_lo.hi)
    )
    safe_hi = VInterval(
        np.where(straddle, 1.0, q_hi.lo), np.where(straddle, 1.0, q_hi.hi)
    )
    gap = n_hi / safe_hi - n_lo / safe_lo

    # cleared form: (N_high q_low - N_low q_high) * sign(q_low q_high)
    expr = n_hi * q_lo - n_lo * q_hi
    s = kernel.Q_SIGN[check.low] * kernel.Q_SIGN[check.high]
    cl_lo, cl_hi = (expr.lo, expr.hi) if s > 0 else (-expr.hi, -expr.lo)

    lo = np.where(straddle, cl_lo, gap.lo)
    hi = np.where(straddle, cl_hi, gap.hi)
    form = np.where(straddle, FORM_CLEARED, FORM_QUOTIENT)
    lo = np.where(eng.bad, np.nan, lo)
    hi = np.where(eng.bad, np.nan, hi)
    return lo, hi, form.astype("<U2")


def _y1_bounds(lo3, hi3, lo5, hi5):
    """Certified lower bound of |y1| per lane (0.0 when not yet decided);
    the upper bound is +inf because nonvanishing is never refutable."""
    n = lo3.size
    eng = _MaskedBackend(n)
    y = kernel.y1_num(
        eng, VInterval(lo3, hi3), VInterval(lo5, hi5), d2cache={}
    )
    lo = np.where(y.hi < 0.0, -y.hi, np.where(y.lo > 0.0, y.lo, 0.0))
    form = np.where(
        y.hi < 0.0, FORM_Y1_NEG, np.where(y.lo > 0.0, FORM_Y1_POS, FORM_UNDECIDED)
    )
    lo = np.where(eng.bad, np.nan, lo)
    hi = np.full(n, np.inf)
    return lo, hi, form.astype("<U2")


def _plan_checks(plan: RegionPlan) -> List[object]:
    out: List[object] = []
    if plan.main is not None:
        out.append(plan.main)
    out.extend(z.check for z in plan.zones)
    if plan.bands is not None:
        out.extend(b.check for b in plan.bands)
    return out


def _classify(plan: RegionPlan, lo3, hi3, lo5, hi5) -> np.ndarray:
    """Check index (into _plan_checks order) for every box."""
    n = lo3.size
    cid = np.full(n, 0 if plan.main is not None else -1, dtype=np.int64)
    k = 1 if plan.main is not None else 0
    for z in plan.zones:
        m = (lo3 >= z.r3_lo) & (hi3 <= z.r3_hi) & (lo5 >= z.r5_lo) & (hi5 <= z.r5_hi)
        cid[m] = k
        k += 1
    for band in plan.bands or ():
        m = (lo3 >= band.r3_lo) & (hi3 <= band.r3_hi)
        cid[m] = k
        k += 1
    if np.any(cid < 0):
        j = int(np.flatnonzero(cid < 0)[0])
        raise ValueError(
            f"box r3=[{lo3[j]}, {hi3[j]}] straddles a {plan.region} band break"
        )
    return cid


def _batch_bounds(plan: RegionPlan, lo3, hi3, lo5, hi5):
    checks = _plan_checks(plan)
    cid = _classify(plan, lo3, hi3, lo5, hi5)
    n = lo3.size
    lo = np.empty(n)
    hi = np.empty(n)
    form = np.empty(n, dtype="<U2")
    for k, chk in enumerate(checks):
        m = cid == k
        if not np.any(m):
            continue
        if isinstance(chk, PairCheck):
            l, h, f = _pair_bounds(chk, lo3[m], hi3[m], lo5[m], hi5[m])
        else:
            l, h, f = _y1_bounds(lo3[m], hi3[m], lo5[m], hi5[m])
        lo[m], hi[m], form[m] = l, h, f
    return lo, hi, form, cid


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------


def plan_signature(plan: RegionPlan) -> str:
    parts = []
    if plan.main is not None:
        parts.append("main=" + plan.main.describe())
    for z in plan.zones:
        parts.append(
            f"zone[{z.r3_lo.hex()},{z.r3_hi.hex()}]x"
            f"[{z.r5_lo.hex()},{z.r5_hi.hex()}]={z.check.describe()}"
        )
    for b in plan.bands or ():
        parts.append(f"band({b.r3_lo.hex()},{b.r3_hi.hex()}]={b.check.describe()}")
    return plan.region + "{" + ";".join(parts) + "}"


def build_fingerprint() -> str:
    """sha256 over the format version, the golden-constant enclosures, the
    region tables and the plans — anything that would change certified
    numbers if it changed."""
    h = hashlib.sha256()
    h.update(FORMAT_VERSION.encode())
    pc = pentagon_constants()
    for iv in (pc.sqrt5, pc.a, pc.b, pc.half_a, pc.half_b) + pc.cos + pc.sin:
        h.update(f"{iv.lo.hex()}|{iv.hi.hex()};".encode())
    for rid in REGION_IDS:
        for c in region_def(rid).constraints:
            h.update(
                f"{rid}:{c.a.hex()},{c.b.hex()},{c.c.hex()},{c.op};".encode()
            )
        h.update(plan_signature(region_plan(rid)).encode())
    return h.hexdigest()


@dataclass
class Certificate:
    """Verified-inequality certificate for one region.

    Leaves are parallel arrays; `bounds` holds the certified lower bound
    of the leaf's planned quantity (gap or |y1|), all strictly positive.
    """

    region: str
    plan: str
    max_box_width: float
    delta_b0: Optional[float]
    truncation: Optional[float]
    excluded: Optional[Tuple[float, float, float, float]]
    lo3: np.ndarray
    hi3: np.ndarray
    lo5: np.ndarray
    hi5: np.ndarray
    bounds: np.ndarray
    forms: np.ndarray
    min_bound: float = 0.0
    stats: Dict[str, float] = field(default_factory=dict)
    fingerprint: str = ""

    def n_leaves(self) -> int:
        return int(self.lo3.size)

    def to_payload(self) -> dict:
        return {
            "format": FORMAT_VERSION,
            "kind": "inequality",
            "region": self.region,
            "plan": self.plan,
            "max_box_width": float(self.max_box_width).hex(),
            "delta_b0": None if self.delta_b0 is None else float(self.delta_b0).hex(),
            "truncation": None
            if self.truncation is None
            else float(self.truncation).hex(),
            "excluded": None
            if self.excluded is None
            else [float(v).hex() for v in self.excluded],
            "min_bound": float(self.min_bound).hex(),
            "stats": self.stats,
            "fingerprint": self.fingerprint,
            "leaves": [
                [
                    float(a).hex(),
                    float(b).hex(),
                    float(c).hex(),
                    float(d).hex(),
                    str(f),
                    float(g).hex(),
                ]
                for a, b, c, d, f, g in zip(
                    self.lo3, self.hi3, self.lo5, self.hi5, self.forms, self.bounds
                )
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_payload())

    @staticmethod
    def from_payload(d: dict) -> "Certificate":
        try:
            if d["format"] != FORMAT_VERSION or d["kind"] != "inequality":
                raise MalformedCertificate(
                    f"unsupported format {d.get('format')!r}/{d.get('kind')!r}"
                )
            rows = d["leaves"]
            lo3 = np.array([float.fromhex(r[0]) for r in rows])
            hi3 = np.array([float.fromhex(r[1]) for r in rows])
            lo5 = np.array([float.fromhex(r[2]) for r in rows])
            hi5 = np.array([float.fromhex(r[3]) for r in rows])
            forms = np.array([r[4] for r in rows], dtype="<U2")
            bounds = np.array([float.fromhex(r[5]) for r in rows])
            return Certificate(
                region=d["region"],
                plan=d["plan"],
                max_box_width=float.fromhex(d["max_box_width"]),
                delta_b0=None
                if d["delta_b0"] is None
                else float.fromhex(d["delta_b0"]),
                truncation=None
                if d["truncation"] is None
                else float.fromhex(d["truncation"]),
                excluded=None
                if d["excluded"] is None
                else tuple(float.fromhex(v) for v in d["excluded"]),
                lo3=lo3,
                hi3=hi3,
                lo5=lo5,
                hi5=hi5,
                bounds=bounds,
                forms=forms,
                min_bound=float.fromhex(d["min_bound"]),
                stats=dict(d.get("stats", {})),
                fingerprint=d["fingerprint"],
            )
        except MalformedCertificate:
            raise
        except Exception as exc:
            raise MalformedCertificate(f"bad certificate payload: {exc}") from exc


# ---------------------------------------------------------------------------
# Branch and bound
# ---------------------------------------------------------------------------

_BOX_CAP = 4_000_000


def certify_inequality(
    region_id: str,
    max_box_width: float = 0.02,
    truncation: Optional[float] = None,
    delta: float = DELTA_B0,
    max_depth: int = 48,
    plan: Optional[RegionPlan] = None,
) -> Certificate:
    """Certify the region's planned inequality over its whole cover.

    Raises CertificationRefuted if a box inside the region has a
    certified negative gap, BudgetExhausted if boxes remain unresolved
    after max_depth bisection generations.
    """
    t0 = time.perf_counter()
    reg = region_def(region_id)
    the_plan = plan if plan is not None else region_plan(region_id)
    lo3, hi3, lo5, hi5 = cover_arrays(region_id, max_box_width, truncation, delta)
    n_initial = int(lo3.size)
    excised = region_excises_b0(region_id, delta)

    leaf_parts: List[Tuple[np.ndarray, ...]] = []
    depth = 0
    evals = 0
    total_boxes = n_initial
    while lo3.size:
        if depth > max_depth:
            j = int(np.argmax(hi3 - lo3))
            raise BudgetExhausted(
                f"{region_id}: {lo3.size} boxes unresolved at depth {max_depth}, "
                f"e.g. r3=[{lo3[j]}, {hi3[j]}], r5=[{lo5[j]}, {hi5[j]}]"
            )
        if total_boxes > _BOX_CAP:
            raise BudgetExhausted(f"{region_id}: box count exceeded {_BOX_CAP}")
        blo, bhi, form, _ = _batch_bounds(the_plan, lo3, hi3, lo5, hi5)
        evals += int(lo3.size)

        refute = np.isfinite(bhi) & (bhi < 0.0)
        for j in np.flatnonzero(refute):
            cx = 0.5 * (lo3[j] + hi3[j])
            cy = 0.5 * (lo5[j] + hi5[j])
            if reg.contains((cx, cy)):
                raise CertificationRefuted(
                    f"{region_id}: certified negative gap {bhi[j]:.6g} on "
                    f"r3=[{lo3[j]}, {hi3[j]}], r5=[{lo5[j]}, {hi5[j]}]"
                )

        ok = blo > 0.0  # NaN compares false
        if np.any(ok):
            leaf_parts.append(
                (lo3[ok], hi3[ok], lo5[ok], hi5[ok], blo[ok], form[ok])
            )
        rest = ~ok
        if not np.any(rest):
            break
        l3, h3, l5, h5 = lo3[rest], hi3[rest], lo5[rest], hi5[rest]
        w3 = h3 - l3
        w5 = h5 - l5
        split3 = w3 >= w5
        m3 = 0.5 * (l3 + h3)
        m5 = 0.5 * (l5 + h5)
        c_lo3 = np.concatenate([l3, np.where(split3, m3, l3)])
        c_hi3 = np.concatenate([np.where(split3, m3, h3), h3])
        c_lo5 = np.concatenate([l5, np.where(split3, l5, m5)])
        c_hi5 = np.concatenate([np.where(split3, h5, m5), h5])
        keep = ~reg.boxes_outside_closure(c_lo3, c_hi3, c_lo5, c_hi5)
        lo3, hi3, lo5, hi5 = c_lo3[keep], c_hi3[keep], c_lo5[keep], c_hi5[keep]
        total_boxes += int(lo3.size)
        depth += 1

    if not leaf_parts:
        raise BudgetExhausted(f"{region_id}: no box could be certified")
    parts = [np.concatenate([p[i] for p in leaf_parts]) for i in range(6)]
    order = np.lexsort((parts[3], parts[2], parts[1], parts[0]))
    lo3, hi3, lo5, hi5, bounds, forms = (p[order] for p in parts)
    return Certificate(
        region=region_id,
        plan=plan_signature(the_plan),
        max_box_width=float(max_box_width),
        delta_b0=float(delta) if excised else None,
        truncation=float(truncation) if reg.unbounded else None,
        excluded=(1.0 - delta, 1.0 + delta, 1.0 - delta, 1.0 + delta)
        if excised
        else None,
        lo3=lo3,
        hi3=hi3,
        lo5=lo5,
        hi5=hi5,
        bounds=bounds,
        forms=forms,
        min_bound=float(bounds.min()),
        stats={
            "boxes_initial": n_initial,
            "boxes_total": total_boxes,
            "leaves": int(lo3.size),
            "max_depth": depth,
            "evaluations": evals,
            "wall_seconds": round(time.perf_counter() - t0, 3),
        },
        fingerprint=build_fingerprint(),
    )


# ---------------------------------------------------------------------------
# Krawczyk local uniqueness
# ---------------------------------------------------------------------------

LOCAL_PAIRS = (((1, 1), (3, 1)), ((1, 1), (5, 1)))

# The Krawczyk contraction runs on a small box around the pentagon point;
# the rest of the window is handled by certified zero-exclusion, because
# the Jacobian of the gap map varies too much across the full window for
# a single contraction test to close (the exact-range operator norm is
# already 0.92 there).
INNER_DELTA = 0.002
ANNULUS_BOX_WIDTH = 0.002


def _gap_jets(box: Box2):
    """Interval jets of the two gap maps F = (l11-l31, l11-l51) over box."""
    dbk = DualBackend()
    r3d, r5d = dual_vars(box)
    radii = kernel.derived_radii(dbk, r3d, r5d)
    cache: dict = {}
    lam = {}
    for (i, k) in sorted({p for pair in LOCAL_PAIRS for p in pair}):
        lam[i, k] = kernel.lambda_num(dbk, radii, i, k, cache) / kernel.lambda_den(
            dbk, radii, i, k
        )
    return tuple(lam[a] - lam[b] for a, b in LOCAL_PAIRS)


@dataclass
class LocalUniquenessCertificate:
    """Evidence that the window holds exactly one zero of the two-gap map.

    Structure: the Krawczyk map contracts the inner (1±inner_delta) box
    into itself (existence and uniqueness there, with a nonsingular
    Jacobian enclosure), and every box of the surrounding annulus carries
    a certified sign for one of the two gap components (no zero outside
    the inner box).  The center residual pins that unique zero to the
    pentagon point."""

    delta: float
    inner_delta: float
    center: Tuple[float, float]
    pair_map: Tuple[str, str]
    subdivision: int
    y_matrix: Tuple[Tuple[float, float], Tuple[float, float]]
    f_center: Tuple[Tuple[float, float], ...]
    jacobian: Tuple[Tuple[Tuple[float, float], ...], ...]
    det_jacobian: Tuple[float, float]
    k_image: Tuple[Tuple[float, float], ...]
    containment_margin: float
    posteriori_residual: float
    ann_lo3: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ann_hi3: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ann_lo5: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ann_hi5: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ann_comp: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype="<U2"))
    ann_bound: np.ndarray = field(default_factory=lambda: np.zeros(0))
    fingerprint: str = ""

    def to_payload(self) -> dict:
        hx = lambda t: [float(v).hex() for v in t]  # noqa: E731
        return {
            "format": FORMAT_VERSION,
            "kind": "local-uniqueness",
            "delta": float(self.delta).hex(),
            "inner_delta": float(self.inner_delta).hex(),
            "center": hx(self.center),
            "pair_map": list(self.pair_map),
            "subdivision": self.subdivision,
            "y_matrix": [hx(r) for r in self.y_matrix],
            "f_center": [hx(r) for r in self.f_center],
            "jacobian": [[hx(e) for e in row] for row in self.jacobian],
            "det_jacobian": hx(self.det_jacobian),
            "k_image": [hx(r) for r in self.k_image],
            "containment_margin": float(self.containment_margin).hex(),
            "posteriori_residual": float(self.posteriori_residual).hex(),
            "annulus": [
                [
                    float(a).hex(),
                    float(b).hex(),
                    float(c).hex(),
                    float(d).hex(),
                    str(comp),
                    float(g).hex(),
                ]
                for a, b, c, d, comp, g in zip(
                    self.ann_lo3,
                    self.ann_hi3,
                    self.ann_lo5,
                    self.ann_hi5,
                    self.ann_comp,
                    self.ann_bound,
                )
            ],
            "fingerprint": self.fingerprint,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_payload())

    @staticmethod
    def from_payload(d: dict) -> "LocalUniquenessCertificate":
        try:
            if d["format"] != FORMAT_VERSION or d["kind"] != "local-uniqueness":
                raise MalformedCertificate("unsupported local certificate format")
            fh = float.fromhex
            pair = lambda t: (fh(t[0]), fh(t[1]))  # noqa: E731
            rows = d["annulus"]
            return LocalUniquenessCertificate(
                delta=fh(d["delta"]),
                inner_delta=fh(d["inner_delta"]),
                center=pair(d["center"]),
                pair_map=tuple(d["pair_map"]),
                subdivision=int(d["subdivision"]),
                y_matrix=tuple(pair(r) for r in d["y_matrix"]),
                f_center=tuple(pair(r) for r in d["f_center"]),
                jacobian=tuple(tuple(pair(e) for e in row) for row in d["jacobian"]),
                det_jacobian=pair(d["det_jacobian"]),
                k_image=tuple(pair(r) for r in d["k_image"]),
                containment_margin=fh(d["containment_margin"]),
                posteriori_residual=fh(d["posteriori_residual"]),
                ann_lo3=np.array([fh(r[0]) for r in rows]),
                ann_hi3=np.array([fh(r[1]) for r in rows]),
                ann_lo5=np.array([fh(r[2]) for r in rows]),
                ann_hi5=np.array([fh(r[3]) for r in rows]),
                ann_comp=np.array([r[4] for r in rows], dtype="<U2"),
                ann_bound=np.array([fh(r[5]) for r in rows]),
                fingerprint=d["fingerprint"],
            )
        except MalformedCertificate:
            raise
        except Exception as exc:
            raise MalformedCertificate(f"bad local certificate: {exc}") from exc


def _contraction_evidence(inner_delta: float, subdivision: int):
    """Krawczyk enclosures on the inner box, computed rigorously."""
    center = (1.0, 1.0)
    inner = Box2.from_bounds(
        1.0 - inner_delta, 1.0 + inner_delta, 1.0 - inner_delta, 1.0 + inner_delta
    )

    f_center = tuple((g.v.lo, g.v.hi) for g in _gap_jets(Box2.point(*center)))

    # Jacobian enclosure over the inner box: hull over a subdivision grid.
    edges = np.linspace(inner.r3.lo, inner.r3.hi, subdivision + 1)
    J: List[List[Optional[Interval]]] = [[None, None], [None, None]]
    for i0 in range(subdivision):
        for j0 in range(subdivision):
            sub = Box2.from_bounds(edges[i0], edges[i0 + 1], edges[j0], edges[j0 + 1])
            g1, g2 = _gap_jets(sub)
            for r, g in enumerate((g1, g2)):
                for c, dv in enumerate((g.d3, g.d5)):
                    J[r][c] = dv if J[r][c] is None else J[r][c].hull(dv)

    det = J[0][0] * J[1][1] - J[0][1] * J[1][0]

    # midpoint Jacobian -> approximate inverse Y (plain floats)
    jm = [[J[r][c].mid() for c in range(2)] for r in range(2)]
    dm = jm[0][0] * jm[1][1] - jm[0][1] * jm[1][0]
    Y = ((jm[1][1] / dm, -jm[0][1] / dm), (-jm[1][0] / dm, jm[0][0] / dm))

    # K = m - Y F(m) + (I - Y J)(X - m)
    dx = inner.r3 - thin(center[0])
    dy = inner.r5 - thin(center[1])
    fm = [Interval(*f_center[0]), Interval(*f_center[1])]
    K = []
    for r in range(2):
        yr = (thin(Y[r][0]), thin(Y[r][1]))
        shift = yr[0] * fm[0] + yr[1] * fm[1]
        R0 = (thin(1.0 if r == 0 else 0.0)) - (yr[0] * J[0][0] + yr[1] * J[1][0])
        R1 = (thin(1.0 if r == 1 else 0.0)) - (yr[0] * J[0][1] + yr[1] * J[1][1])
        K.append(thin(center[r]) - shift + R0 * dx + R1 * dy)

    margin = min(
        K[0].lo - inner.r3.lo,
        inner.r3.hi - K[0].hi,
        K[1].lo - inner.r5.lo,
        inner.r5.hi - K[1].hi,
    )
    resid = max(max(abs(lo), abs(hi)) for lo, hi in f_center)
    return {
        "center": center,
        "f_center": f_center,
        "jacobian": tuple(
            tuple((J[r][c].lo, J[r][c].hi) for c in range(2)) for r in range(2)
        ),
        "det_jacobian": (det.lo, det.hi),
        "y_matrix": Y,
        "k_image": tuple((k.lo, k.hi) for k in K),
        "containment_margin": margin,
        "posteriori_residual": resid,
    }


_ANNULUS_CHECKS = (PairCheck((3, 1), (1, 1)), PairCheck((5, 1), (1, 1)))
_COMP_CODES = ("1+", "1-", "2+", "2-")


def _annulus_batch(lo3, hi3, lo5, hi5):
    """For every box, the first certified-nonzero gap component in the
    fixed order 1+, 1-, 2+, 2- and its distance from zero (0 if none)."""
    g1lo, g1hi, _ = _pair_bounds(_ANNULUS_CHECKS[0], lo3, hi3, lo5, hi5)
    g2lo, g2hi, _ = _pair_bounds(_ANNULUS_CHECKS[1], lo3, hi3, lo5, hi5)
    n = lo3.size
    comp = np.full(n, "", dtype="<U2")
    bound = np.zeros(n)
    for code, val in (
        ("1+", g1lo),
        ("1-", -g1hi),
        ("2+", g2lo),
        ("2-", -g2hi),
    ):
        pick = (comp == "") & (val > 0.0)
        comp[pick] = code
        bound[pick] = val[pick]
    return comp, bound


def _annulus_exclusion(delta, inner_delta, box_width, max_depth=30):
    """Cover the window minus the inner box and certify a nonzero gap
    component on every box."""
    from .regions import _snap_edges

    edges = _snap_edges(
        1.0 - delta, 1.0 + delta, box_width, (1.0 - inner_delta, 1.0 + inner_delta)
    )
    lo3, lo5 = np.meshgrid(edges[:-1], edges[:-1], indexing="ij")
    hi3, hi5 = np.meshgrid(edges[1:], edges[1:], indexing="ij")
    lo3, hi3, lo5, hi5 = (a.ravel() for a in (lo3, hi3, lo5, hi5))
    in_inner = (
        (lo3 >= 1.0 - inner_delta)
        & (hi3 <= 1.0 + inner_delta)
        & (lo5 >= 1.0 - inner_delta)
        & (hi5 <= 1.0 + inner_delta)
    )
    lo3, hi3, lo5, hi5 = (a[~in_inner] for a in (lo3, hi3, lo5, hi5))

    parts = []
    depth = 0
    while lo3.size:
        if depth > max_depth:
            raise BudgetExhausted(
                f"annulus: {lo3.size} boxes unresolved at depth {max_depth}"
            )
        comp, bound = _annulus_batch(lo3, hi3, lo5, hi5)
        ok = comp != ""
        if np.any(ok):
            parts.append((lo3[ok], hi3[ok], lo5[ok], hi5[ok], comp[ok], bound[ok]))
        rest = ~ok
        if not np.any(rest):
            break
        l3, h3, l5, h5 = lo3[rest], hi3[rest], lo5[rest], hi5[rest]
        split3 = (h3 - l3) >= (h5 - l5)
        m3 = 0.5 * (l3 + h3)
        m5 = 0.5 * (l5 + h5)
        lo3 = np.concatenate([l3, np.where(split3, m3, l3)])
        hi3 = np.concatenate([np.where(split3, m3, h3), h3])
        lo5 = np.concatenate([l5, np.where(split3, l5, m5)])
        hi5 = np.concatenate([np.where(split3, h5, m5), h5])
        depth += 1
    if not parts:
        raise BudgetExhausted("annulus: empty cover")
    out = [np.concatenate([p[i] for p in parts]) for i in range(6)]
    order = np.lexsort((out[3], out[2], out[1], out[0]))
    return tuple(o[order] for o in out)


def certify_local_uniqueness(
    delta: float = DELTA_B0,
    subdivision: int = 8,
    posteriori_tol: float = 1e-10,
    inner_delta: float = INNER_DELTA,
    annulus_box_width: float = ANNULUS_BOX_WIDTH,
) -> LocalUniquenessCertificate:
    """Certificate that the (1±delta) square holds exactly one zero of
    the two-gap map, and the center is that zero to within
    posteriori_tol."""
    if not (0.0 < delta < 0.5):
        raise DomainError(f"window half-width {delta} outside (0, 0.5)")
    if not (0.0 < inner_delta < delta):
        raise DomainError(f"inner half-width {inner_delta} outside (0, {delta})")
    ev = _contraction_evidence(inner_delta, subdivision)
    if ev["containment_margin"] <= 0.0:
        raise ContractionFailure(
            f"Krawczyk image not strictly contained "
            f"(margin {ev['containment_margin']:.3e})"
        )
    dlo, dhi = ev["det_jacobian"]
    if dlo <= 0.0 <= dhi:
        raise ContractionFailure(f"Jacobian enclosure det [{dlo}, {dhi}] contains 0")
    if ev["posteriori_residual"] > posteriori_tol:
        raise ContractionFailure(
            f"center residual {ev['posteriori_residual']:.3e} > {posteriori_tol}"
        )
    ann = _annulus_exclusion(delta, inner_delta, annulus_box_width)
    return LocalUniquenessCertificate(
        delta=float(delta),
        inner_delta=float(inner_delta),
        center=ev["center"],
        pair_map=(
            "lambda_11 - lambda_31",
            "lambda_11 - lambda_51",
        ),
        subdivision=subdivision,
        y_matrix=ev["y_matrix"],
        f_center=ev["f_center"],
        jacobian=ev["jacobian"],
        det_jacobian=ev["det_jacobian"],
        k_image=ev["k_image"],
        containment_margin=ev["containment_margin"],
        posteriori_residual=ev["posteriori_residual"],
        ann_lo3=ann[0],
        ann_hi3=ann[1],
        ann_lo5=ann[2],
        ann_hi5=ann[3],
        ann_comp=ann[4],
        ann_bound=ann[5],
        fingerprint=build_fingerprint(),
    )


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


def _as_certificate(cert) -> Certificate:
    if isinstance(cert, Certificate):
        return cert
    if isinstance(cert, str):
        cert = json.loads(cert)
    if isinstance(cert, dict):
        return Certificate.from_payload(cert)
    raise MalformedCertificate(f"cannot interpret {type(cert).__name__} as certificate")


def verify_certificate(cert, coverage_samples: int = 4096, seed: int = 7) -> bool:
    """Re-derive everything a region certificate claims.

    * fingerprint and plan must match this build exactly;
    * every leaf bound is recomputed bit-for-bit and must be positive;
    * seeded quasi-random region points must all land in a leaf or the
      excised square (coverage re-audit).
    """
    c = _as_certificate(cert)
    if c.region not in REGION_IDS:
        raise MalformedCertificate(f"unknown region {c.region!r}")
    if c.fingerprint != build_fingerprint():
        raise MalformedCertificate("fingerprint does not match this build")
    plan = region_plan(c.region)
    if c.plan != plan_signature(plan):
        raise MalformedCertificate("plan does not match this build")
    if c.n_leaves() == 0:
        raise MalformedCertificate("certificate has no leaves")
    if not np.all(np.isfinite(c.bounds)) or not np.all(c.bounds > 0.0):
        raise LeafBoundViolation("stored bounds must all be finite and positive")
    if float(c.bounds.min()) != c.min_bound:
        raise LeafBoundViolation("min_bound does not equal the leaf minimum")

    blo, _, form, _ = _batch_bounds(plan, c.lo3, c.hi3, c.lo5, c.hi5)
    same = (blo == c.bounds) & (form == c.forms)
    if not np.all(same):
        j = int(np.flatnonzero(~same)[0])
        raise LeafBoundViolation(
            f"leaf {j} at r3=[{float(c.lo3[j])!r}, {float(c.hi3[j])!r}],"
            f" r5=[{float(c.lo5[j])!r}, {float(c.hi5[j])!r}]: stored bound"
            f" {float(c.bounds[j])!r}/{c.forms[j]} recomputes to"
            f" {float(blo[j])!r}/{form[j]}"
        )

    _coverage_audit(c, coverage_samples, seed)
    return True


def _coverage_audit(c: Certificate, samples: int, seed: int) -> None:
    from scipy.stats import qmc

    reg = region_def(c.region)
    r3lo, r3hi, r5lo, r5hi = reg.bbox(c.truncation)
    pts = qmc.Sobol(d=2, scramble=True, seed=seed).random(samples)
    x = r3lo + pts[:, 0] * (r3hi - r3lo)
    y = r5lo + pts[:, 1] * (r5hi - r5lo)
    inside = np.array([reg.contains((a, b)) for a, b in zip(x, y)])
    x, y = x[inside], y[inside]
    if c.excluded is not None:
        xlo, xhi, ylo, yhi = c.excluded
        in_b0 = (x > xlo) & (x < xhi) & (y > ylo) & (y < yhi)
        x, y = x[~in_b0], y[~in_b0]
    covered = np.zeros(x.size, dtype=bool)
    for start in range(0, x.size, 256):
        sl = slice(start, start + 256)
        hit = (
            (x[sl, None] >= c.lo3[None, :])
            & (x[sl, None] <= c.hi3[None, :])
            & (y[sl, None] >= c.lo5[None, :])
            & (y[sl, None] <= c.hi5[None, :])
        )
        covered[sl] = hit.any(axis=1)
    if not covered.all():
        j = int(np.flatnonzero(~covered)[0])
        raise CoverageGap(
            f"{c.region}: point ({x[j]!r}, {y[j]!r}) is outside every leaf"
        )


def verify_local_certificate(cert, coverage_samples: int = 4096, seed: int = 11) -> bool:
    """Recompute the contraction evidence and every annulus bound
    bit-for-bit, re-check the acceptance conditions (containment,
    nonsingularity, center residual) and re-audit annulus coverage."""
    if isinstance(cert, str):
        cert = json.loads(cert)
    if isinstance(cert, dict):
        cert = LocalUniquenessCertificate.from_payload(cert)
    if cert.fingerprint != build_fingerprint():
        raise MalformedCertificate("fingerprint does not match this build")
    ev = _contraction_evidence(cert.inner_delta, cert.subdivision)
    stored = {
        "f_center": cert.f_center,
        "jacobian": cert.jacobian,
        "det_jacobian": cert.det_jacobian,
        "y_matrix": cert.y_matrix,
        "k_image": cert.k_image,
        "containment_margin": cert.containment_margin,
        "posteriori_residual": cert.posteriori_residual,
    }
    for key, val in stored.items():
        if not np.array_equal(np.asarray(ev[key], dtype=float), np.asarray(val, dtype=float)):
            raise LeafBoundViolation(f"local certificate field {key} does not recompute")
    if cert.containment_margin <= 0.0:
        raise ContractionFailure("stored containment margin is not positive")
    dlo, dhi = cert.det_jacobian
    if dlo <= 0.0 <= dhi:
        raise ContractionFailure("stored Jacobian determinant encloses zero")

    if cert.ann_lo3.size == 0:
        raise MalformedCertificate("local certificate has no annulus leaves")
    if not np.all(cert.ann_bound > 0.0):
        raise LeafBoundViolation("annulus bounds must all be positive")
    comp, bound = _annulus_batch(
        cert.ann_lo3, cert.ann_hi3, cert.ann_lo5, cert.ann_hi5
    )
    same = (comp == cert.ann_comp) & (bound == cert.ann_bound)
    if not np.all(same):
        j = int(np.flatnonzero(~same)[0])
        raise LeafBoundViolation(
            f"annulus leaf {j}: stored {cert.ann_bound[j]!r}/{cert.ann_comp[j]} "
            f"recomputes to {bound[j]!r}/{comp[j]}"
        )

    # coverage: sampled window points outside the inner box must be in a leaf
    from scipy.stats import qmc

    pts = qmc.Sobol(d=2, scramble=True, seed=seed).random(coverage_samples)
    x = 1.0 - cert.delta + pts[:, 0] * (2 * cert.delta)
    y = 1.0 - cert.delta + pts[:, 1] * (2 * cert.delta)
    inner = (
        (x > 1.0 - cert.inner_delta)
        & (x < 1.0 + cert.inner_delta)
        & (y > 1.0 - cert.inner_delta)
        & (y < 1.0 + cert.inner_delta)
    )
    x, y = x[~inner], y[~inner]
    covered = np.zeros(x.size, dtype=bool)
    for start in range(0, x.size, 256):
        sl = slice(start, start + 256)
        hit = (
            (x[sl, None] >= cert.ann_lo3[None, :])
            & (x[sl, None] <= cert.ann_hi3[None, :])
            & (y[sl, None] >= cert.ann_lo5[None, :])
            & (y[sl, None] <= cert.ann_hi5[None, :])
        )
        covered[sl] = hit.any(axis=1)
    if not covered.all():
        j = int(np.flatnonzero(~covered)[0])
        raise CoverageGap(f"annulus point ({x[j]!r}, {y[j]!r}) is outside every leaf")
    return True


# ---------------------------------------------------------------------------
# The full run
# ---------------------------------------------------------------------------


@dataclass
class CertificationManifest:
    verdict: str
    config: Dict[str, object]
    local: LocalUniquenessCertificate
    certificates: Dict[str, Certificate]
    solution_witness: Dict[str, object]
    wall_seconds: float
    fingerprint: str

    def summary_payload(self) -> dict:
        return {
            "format": FORMAT_VERSION,
            "kind": "manifest",
            "verdict": self.verdict,
            "config": self.config,
            "fingerprint": self.fingerprint,
            "wall_seconds": self.wall_seconds,
            "solution_witness": self.solution_witness,
            "local": {
                "containment_margin": self.local.containment_margin,
                "posteriori_residual": self.local.posteriori_residual,
            },
            "regions": {
                rid: {
                    "min_bound": cert.min_bound,
                    "leaves": cert.n_leaves(),
                    "stats": cert.stats,
                }
                for rid, cert in self.certificates.items()
            },
        }


def _solution_witness(config: RunConfig) -> Dict[str, object]:
    """Floating and interval evidence that the pentagon point solves the
    central-configuration system."""
    res = residual_vector((1.0, 1.0))
    pt = Box2.point(1.0, 1.0)
    g1, g2 = _gap_jets(pt)
    from .intervals import y1_interval

    y1 = y1_interval(pt)
    return {
        "pairwise_spread": res.pairwise_spread,
        "y1": res.y1,
        "is_solution": res.is_solution(config.spread_tol, config.y1_tol),
        "gap_enclosures_contain_zero": bool(
            g1.v.contains(0.0) and g2.v.contains(0.0)
        ),
        "y1_enclosure_contains_zero": bool(y1.contains(0.0)),
    }


def certify_all(config: Optional[RunConfig] = None) -> CertificationManifest:
    """Local certificate + all sixteen region certificates.

    Verdict UNIQUE-IN-WINDOW requires every piece; any failure raises.
    """
    cfg = (config or RunConfig()).validate()
    t0 = time.perf_counter()
    local = certify_local_uniqueness(
        delta=cfg.delta_b0, posteriori_tol=cfg.posteriori_tol
    )
    witness = _solution_witness(cfg)
    if not witness["is_solution"]:
        raise ContractionFailure("pentagon point fails the residual gate")

    def run(rid: str) -> Certificate:
        reg = region_def(rid)
        return certify_inequality(
            rid,
            max_box_width=cfg.max_box_width,
            truncation=cfg.truncation if reg.unbounded else None,
            delta=cfg.delta_b0,
            max_depth=cfg.max_depth,
        )

    certs: Dict[str, Certificate] = {}
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        futures = {rid: pool.submit(run, rid) for rid in REGION_IDS}
        for rid, fut in futures.items():
            certs[rid] = fut.result()

    return CertificationManifest(
        verdict="UNIQUE-IN-WINDOW",
        config={
            "max_box_width": cfg.max_box_width,
            "delta_b0": cfg.delta_b0,
            "truncation": cfg.truncation,
            "max_depth": cfg.max_depth,
            "threads": cfg.threads,
        },
        local=local,
        certificates=certs,
        solution_witness=witness,
        wall_seconds=round(time.perf_counter() - t0, 3),
        fingerprint=build_fingerprint(),
    )
