"""Random-network search and model-order grids.

``erdos_renyi`` draws an undirected unit-distance network: every unordered
pair ``(i, j)``, visited in lexicographic order with ``i < j``, is included
independently when the next uniform from :class:`gnar.rng.RngStream` falls
below ``prob``.  Candidate ``k`` of a search uses seed ``master_seed + k``,
so a fixed master seed fixes the whole candidate list (the canonical list
is ``0..n_networks-1`` under ``master_seed=0``).

``search`` fits every (network, spec) candidate on the training rows,
forecasts to the target row, and scores the squared error over observed
target cells.  Candidates that cannot be fitted score infinity rather than
aborting the search.  Evaluation is embarrassingly parallel; results are
always reduced in candidate order, so serial and parallel runs agree byte
for byte.
"""

from __future__ import annotations

import math
import multiprocessing
import warnings
from dataclasses import dataclass
from functools import partial
from itertools import product
from typing import Sequence

import numpy as np

from .errors import DataError, GnarError
from .estimate import fit
from .forecast import predict, prediction_error
from .model import ModelSpec, param_count
from .network import Edge, Network
from .rng import RngStream
from .series import SeriesMatrix


def erdos_renyi(seed: int, n_nodes: int, prob: float,
                node_names: Sequence[str] | None = None) -> Network:
    """Seeded Erdos-Renyi draw: undirected, unit distances, one covariate."""
    if n_nodes < 1:
        raise ValueError("network needs at least one node")
    if not 0.0 <= prob <= 1.0:
        raise ValueError("edge probability must lie in [0, 1]")
    rng = RngStream(seed)
    pairs = [
        (i, j)
        for i in range(1, n_nodes + 1)
        for j in range(i + 1, n_nodes + 1)
    ]
    u = rng.uniforms(len(pairs))
    edges = tuple(
        Edge(i, j, 1.0, 1) for (i, j), ui in zip(pairs, u) if ui < prob
    )
    names = tuple(node_names) if node_names is not None else ()
    return Network(n_nodes=n_nodes, edges=edges, node_names=names,
                   directed=False, n_cov=1)


@dataclass(eq=False)
class SearchResult:
    """Ranked ``(seed, spec_id, error)`` rows plus the winning candidate."""

    table: list[tuple[int, int, float]]
    best_seed: int
    best_spec_id: int
    best_network: Network
    best_spec: ModelSpec


def _evaluate_candidate(candidate: tuple[int, int], *, vts: SeriesMatrix,
                        specs: tuple[ModelSpec, ...], prob: float,
                        master_seed: int, train_end: int,
                        target: int) -> float:
    k, j = candidate
    net = erdos_renyi(master_seed + k, vts.n_nodes, prob, vts.node_names)
    spec = specs[j]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            train = vts.head(train_end)
            result = fit(train, net, spec)
            pred = predict(net, spec, result.coef, train,
                           target - train_end)
            return prediction_error(pred[-1], vts.values[target - 1])
    except (GnarError, np.linalg.LinAlgError):
        return math.inf


def _parallel_map(worker, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [worker(it) for it in items]
    chunk = max(1, len(items) // (jobs * 8))
    with multiprocessing.Pool(processes=jobs) as pool:
        return pool.map(worker, items, chunksize=chunk)


def search(vts: SeriesMatrix, specs: Sequence[ModelSpec], n_networks: int,
           prob: float, master_seed: int, train_end: int, target: int,
           jobs: int = 1) -> SearchResult:
    """Score random networks by out-of-sample squared prediction error.

    Fits each candidate on rows ``1..train_end``, forecasts
    ``target - train_end`` steps, and scores the final step against row
    ``target``.  Ranking is by error, ties by (seed, spec index).
    """
    specs = tuple(specs)
    if not specs:
        raise ValueError("need at least one candidate model order")
    if n_networks < 1:
        raise ValueError("need at least one candidate network")
    if not 1 <= train_end < target <= vts.n_times:
        raise ValueError(
            "need 1 <= train_end < target <= series length, got "
            f"train_end={train_end}, target={target}, T={vts.n_times}"
        )
    candidates = [
        (k, j) for k in range(n_networks) for j in range(len(specs))
    ]
    worker = partial(
        _evaluate_candidate,
        vts=vts,
        specs=specs,
        prob=prob,
        master_seed=master_seed,
        train_end=train_end,
        target=target,
    )
    scores = _parallel_map(worker, candidates, jobs)
    table = [
        (master_seed + k, j, float(score))
        for (k, j), score in zip(candidates, scores)
    ]
    table.sort(key=lambda row: (row[2], row[0], row[1]))
    best_seed, best_spec_id, best_error = table[0]
    if not math.isfinite(best_error):
        raise GnarError("every candidate failed to fit")
    best_network = erdos_renyi(
        best_seed, vts.n_nodes, prob, vts.node_names
    )
    return SearchResult(
        table=table,
        best_seed=best_seed,
        best_spec_id=best_spec_id,
        best_network=best_network,
        best_spec=specs[best_spec_id],
    )


@dataclass(eq=False)
class IcGridResult:
    rows: list[tuple[ModelSpec, float]]
    best_spec: ModelSpec
    best_value: float
    criterion: str


def _grid_value(spec: ModelSpec, *, vts: SeriesMatrix, net: Network,
                criterion: str) -> float:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            result = fit(vts, net, spec)
            return result.bic if criterion == "bic" else result.aic
    except (GnarError, np.linalg.LinAlgError):
        return math.nan


def full_stage_grid(p: int, max_stage: int) -> list[tuple[int, ...]]:
    """Every stage vector in ``{0..max_stage}^p``, lexicographic."""
    return [tuple(s) for s in product(range(max_stage + 1), repeat=p)]


def ic_grid(vts: SeriesMatrix, net: Network, alpha_orders: Sequence[int],
            beta_grids: Sequence[Sequence[Sequence[int]]],
            criterion: str = "bic", alpha_mode: str = "global",
            groups=None, jobs: int = 1) -> IcGridResult:
    """Information-criterion table over candidate orders.

    ``beta_grids[k]`` lists the stage vectors to pair with
    ``alpha_orders[k]``.  Orders that cannot be fitted are recorded as NaN.
    The argmin breaks ties by smaller parameter count, then lexicographic
    ``(p, s)``.
    """
    if criterion not in ("bic", "aic"):
        raise ValueError(f"unknown criterion {criterion!r}")
    if len(alpha_orders) != len(beta_grids):
        raise ValueError("alpha_orders and beta_grids must align")
    specs = [
        ModelSpec(p=int(p_val), s=tuple(int(v) for v in s),
                  n_cov=net.n_cov, alpha_mode=alpha_mode, groups=groups)
        for p_val, grid in zip(alpha_orders, beta_grids)
        for s in grid
    ]
    if not specs:
        raise ValueError("empty candidate grid")
    worker = partial(_grid_value, vts=vts, net=net, criterion=criterion)
    values = _parallel_map(worker, specs, jobs)
    rows = list(zip(specs, [float(v) for v in values]))
    finite = [
        (v, param_count(sp, net.n_nodes), (sp.p, *sp.s), sp)
        for sp, v in rows
        if math.isfinite(v)
    ]
    if not finite:
        raise GnarError("no candidate order could be fitted")
    best_value, _, _, best = min(finite, key=lambda item: item[:3])
    return IcGridResult(
        rows=rows, best_spec=best, best_value=best_value,
        criterion=criterion,
    )


def normalize_by_node_sd(vts: SeriesMatrix,
                         window_end: int) -> tuple[SeriesMatrix, np.ndarray]:
    """Divide each column by its sample deviation over rows 1..window_end.

    Every node needs at least two observed values with nonzero deviation in
    the window.  Returns the rescaled series and the scale vector.
    """
    if not 1 <= window_end <= vts.n_times:
        raise ValueError(
            f"window end must lie in 1..{vts.n_times}, got {window_end}"
        )
    window = vts.values[:window_end]
    scales = np.empty(vts.n_nodes)
    for i, name in enumerate(vts.node_names):
        obs = window[:, i][~np.isnan(window[:, i])]
        if obs.size < 2:
            raise DataError(
                f"node {name}: need >= 2 observed values in the window"
            )
        sd = float(np.std(obs, ddof=1))
        if not (np.isfinite(sd) and sd > 0):
            raise DataError(f"node {name}: zero or undefined deviation")
        scales[i] = sd
    return (
        SeriesMatrix(vts.values / scales, vts.node_names),
        scales,
    )
