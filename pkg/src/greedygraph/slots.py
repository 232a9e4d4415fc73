"""Per-pair triangle-slot classification and trajectory window checks.

For a pair g = {u, v} and each third vertex w, the potential triangle on
{u, v, w} is classified by the state of its two other pairs:

    closed      both already in the graph
    half open   exactly one in the graph, the other not yet traversed and
                individually addable (its insertion keeps the graph
                triangle-free)
    fully open  neither traversed, both individually addable

Counts are compared against the first-order trajectory centres
2*sqrt(n)*traj_i*density_i (half open) and n*density_i**2 (fully open)
inside multiplicative bands 1 +/- c*window(i).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import rng
from .graphcore import (EvolvingGraph, decode_edge_ids, edge_endpoints,
                        edge_index, iter_bits, num_pairs)
from .numerics import RoundContext
from .process import RunTrace


@dataclass(frozen=True)
class SlotCounts:
    """Classification of all n-2 third vertices for one pair at one round."""

    u: int
    v: int
    round: int
    closed: int
    half_open: int
    fully_open: int
    half_open_center: float
    fully_open_center: float
    window: float

    def half_open_ratio(self) -> float:
        if self.half_open_center == 0.0:
            return 1.0 if self.half_open == 0 else float("inf")
        return self.half_open / self.half_open_center

    def fully_open_ratio(self) -> float:
        if self.fully_open_center == 0.0:
            return 1.0 if self.fully_open == 0 else float("inf")
        return self.fully_open / self.fully_open_center


def _blocked_mask(graph: EvolvingGraph, x: int) -> int:
    """Vertices w whose pair {x, w} would close a triangle: the union of
    the neighbourhoods of x's neighbours."""
    adj = graph.adj
    out = 0
    for z in iter_bits(adj[x]):
        out |= adj[z]
    return out


def classify_pair(graph: EvolvingGraph, u: int, v: int, ctx: RoundContext) -> SlotCounts:
    """Slot counts for the pair {u, v} against the snapshot held in ``graph``.

    Pure: recomputing on a stored snapshot always returns the same counts.
    """
    u, v = graph._check_pair(u, v)
    n = graph.n
    i = ctx.round
    adj = graph.adj
    birthed = graph.birthed_adj
    full = (1 << n) - 1
    valid = full & ~(1 << u) & ~(1 << v)
    au, av = adj[u], adj[v]
    addable_u = valid & ~birthed[u] & ~_blocked_mask(graph, u)
    addable_v = valid & ~birthed[v] & ~_blocked_mask(graph, v)
    closed = (au & av & valid).bit_count()
    half = ((au & ~av & valid) & addable_v).bit_count() \
        + ((av & ~au & valid) & addable_u).bit_count()
    fully = (valid & ~au & ~av & addable_u & addable_v).bit_count()
    traj_i = float(ctx.traj[i])
    dens_i = float(ctx.density[i])
    return SlotCounts(
        u=u, v=v, round=i, closed=closed, half_open=half, fully_open=fully,
        half_open_center=2.0 * (n ** 0.5) * traj_i * dens_i,
        fully_open_center=n * dens_i * dens_i,
        window=float(ctx.windows[i]),
    )


def classify_pair_id(graph: EvolvingGraph, pair_id: int, ctx: RoundContext) -> SlotCounts:
    """classify_pair addressed by the canonical pair index."""
    u, v = edge_endpoints(pair_id, graph.n)
    return classify_pair(graph, u, v, ctx)


@dataclass
class RoundWindowReport:
    """Window statistics for one round over a sampled set of pairs."""

    round: int
    sampled: int
    non_birthed: int
    half_within: dict[int, float]        # band scale -> fraction inside
    fully_within: dict[int, float]
    closed_cap: float
    half_cap: float
    closed_cap_violations: int
    half_cap_violations: int
    max_closed: int
    max_half: int
    half_ratio_mean: float
    fully_ratio_mean: float
    half_ratio_spread: float             # max |ratio - 1| over the sample
    fully_ratio_spread: float
    # smallest band multiple that would cover 95% of the sampled pairs
    half_scale_for_95: float
    fully_scale_for_95: float


@dataclass
class TrajectoryReport:
    n: int
    eps: float
    seed: int
    sample_size: int
    band_scales: tuple[int, ...]
    rounds: list[RoundWindowReport] = field(default_factory=list)
    rows: list[SlotCounts] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n, "eps": self.eps, "seed": self.seed,
            "sample_size": self.sample_size,
            "band_scales": list(self.band_scales),
            "rounds": [{
                "i": r.round, "sampled": r.sampled, "non_birthed": r.non_birthed,
                "half_within": {str(c): f for c, f in r.half_within.items()},
                "fully_within": {str(c): f for c, f in r.fully_within.items()},
                "closed_cap": r.closed_cap, "half_cap": r.half_cap,
                "closed_cap_violations": r.closed_cap_violations,
                "half_cap_violations": r.half_cap_violations,
                "max_closed": r.max_closed, "max_half": r.max_half,
                "half_ratio_mean": r.half_ratio_mean,
                "fully_ratio_mean": r.fully_ratio_mean,
                "half_ratio_spread": r.half_ratio_spread,
                "fully_ratio_spread": r.fully_ratio_spread,
                "half_scale_for_95": r.half_scale_for_95,
                "fully_scale_for_95": r.fully_scale_for_95,
            } for r in self.rounds],
        }


def _quantile(sorted_vals: list[float], q: float) -> float:
    if not sorted_vals:
        return 0.0
    pos = min(len(sorted_vals) - 1, max(0, int(q * len(sorted_vals)) ))
    return sorted_vals[pos]


def check_trajectories(trace: RunTrace, ctx: RoundContext, sample_size: int = 2000,
                       band_scales: tuple[int, ...] = (1, 5), seed: int = 0,
                       keep_rows: bool = False) -> TrajectoryReport:
    """Window report over a per-round uniform sample of pairs.

    For every recorded round, draws ``sample_size`` pairs uniformly from all
    C(n,2); window fractions are computed over the non-traversed pairs of
    the sample (the centres only apply to those), while the absolute caps
    closed <= i * n**(5 eps) and half_open <= i * sqrt(n) are checked on
    every sampled pair, traversed or not.
    """
    if trace.snapshots is None:
        raise ValueError("trace has no snapshots; rerun with record_snapshots=True")
    n = ctx.n
    m = num_pairs(n)
    report = TrajectoryReport(n=n, eps=ctx.eps, seed=seed,
                              sample_size=sample_size, band_scales=tuple(band_scales))
    for i in range(0, ctx.rounds_total + 1):
        graph = trace.snapshots[i]
        cctx = ctx.with_round(i)
        gen = rng.stream(seed, 0, round_=i, purpose=rng.SAMPLE)
        size = min(sample_size, m)
        ids = gen.choice(m, size=size, replace=False)
        us, vs = decode_edge_ids(ids, n)
        closed_cap = i * float(n) ** (5.0 * ctx.eps)
        half_cap = i * n ** 0.5
        window = float(ctx.windows[i])
        closed_viol = half_viol = 0
        max_closed = max_half = 0
        half_ratios: list[float] = []
        fully_ratios: list[float] = []
        for u, v in zip(us.tolist(), vs.tolist()):
            sc = classify_pair(graph, u, v, cctx)
            if keep_rows:
                report.rows.append(sc)
            if sc.closed > closed_cap:
                closed_viol += 1
            if sc.half_open > half_cap:
                half_viol += 1
            max_closed = max(max_closed, sc.closed)
            max_half = max(max_half, sc.half_open)
            if not graph.is_birthed(u, v):
                half_ratios.append(sc.half_open_ratio())
                fully_ratios.append(sc.fully_open_ratio())
        nb = len(half_ratios)
        half_within = {}
        fully_within = {}
        for c in band_scales:
            band = c * window
            half_within[c] = (sum(1 for r in half_ratios if abs(r - 1.0) <= band) / nb
                              if nb else 1.0)
            fully_within[c] = (sum(1 for r in fully_ratios if abs(r - 1.0) <= band) / nb
                               if nb else 1.0)
        hdev = sorted(abs(r - 1.0) for r in half_ratios)
        fdev = sorted(abs(r - 1.0) for r in fully_ratios)
        report.rounds.append(RoundWindowReport(
            round=i, sampled=size, non_birthed=nb,
            half_within=half_within, fully_within=fully_within,
            closed_cap=closed_cap, half_cap=half_cap,
            closed_cap_violations=closed_viol, half_cap_violations=half_viol,
            max_closed=max_closed, max_half=max_half,
            half_ratio_mean=(sum(half_ratios) / nb if nb else 1.0),
            fully_ratio_mean=(sum(fully_ratios) / nb if nb else 1.0),
            half_ratio_spread=(hdev[-1] if hdev else 0.0),
            fully_ratio_spread=(fdev[-1] if fdev else 0.0),
            half_scale_for_95=(_quantile(hdev, 0.95) / window if window else 0.0),
            fully_scale_for_95=(_quantile(fdev, 0.95) / window if window else 0.0),
        ))
    return report


CSV_HEADER = "round,u,v,closed,half_open,fully_open,half_center,fully_center,window"


def write_rows_csv(report: TrajectoryReport, fileobj) -> None:
    """Per-pair dump: (i, edge, counts, centres, window), one row per pair."""
    fileobj.write(CSV_HEADER + "\n")
    for sc in report.rows:
        fileobj.write(f"{sc.round},{sc.u},{sc.v},{sc.closed},{sc.half_open},"
                      f"{sc.fully_open},{sc.half_open_center!r},"
                      f"{sc.fully_open_center!r},{sc.window!r}\n")


__all__ = ["SlotCounts", "classify_pair", "check_trajectories",
           "TrajectoryReport", "RoundWindowReport", "write_rows_csv",
           "edge_index"]
