"""Shared fixtures: the five-node example network and random model draws."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

from gnar import (
    CoefficientSet,
    Edge,
    ModelSpec,
    Network,
    RngStream,
    make_coefficients,
    stationarity_margin,
)

settings.register_profile("repo", derandomize=True, max_examples=60)
settings.load_profile("repo")

FIVE_NET_EDGES = ((1, 4), (1, 5), (2, 3), (2, 4), (3, 4))
FIVE_NET_NAMES = ("A", "B", "C", "D", "E")


def make_five_net() -> Network:
    """Undirected five-node network with edges A-D, A-E, B-C, B-D, C-D."""
    return Network(
        n_nodes=5,
        edges=tuple(Edge(a, b) for a, b in FIVE_NET_EDGES),
        node_names=FIVE_NET_NAMES,
    )


@pytest.fixture
def five_net() -> Network:
    return make_five_net()


def random_network(rng: RngStream, n_nodes: int, n_cov: int = 1,
                   directed: bool = False, extra_edge_prob: float = 0.35,
                   unit_dist: bool = False) -> Network:
    """Random connected network: a random tree plus extra edges."""
    edges = []
    present = set()
    for v in range(2, n_nodes + 1):
        u = 1 + int(rng.uniform() * (v - 1))
        a, b = (u, v) if not directed or rng.uniform() < 0.5 else (v, u)
        dist = 1.0 if unit_dist else 0.5 + 1.5 * rng.uniform()
        cov = 1 + int(rng.uniform() * n_cov)
        edges.append(Edge(a, b, dist, cov))
        present.add((min(a, b), max(a, b)))
    for i in range(1, n_nodes + 1):
        for j in range(i + 1, n_nodes + 1):
            if (i, j) in present or rng.uniform() >= extra_edge_prob:
                continue
            a, b = (i, j) if not directed or rng.uniform() < 0.5 else (j, i)
            dist = 1.0 if unit_dist else 0.5 + 1.5 * rng.uniform()
            cov = 1 + int(rng.uniform() * n_cov)
            edges.append(Edge(a, b, dist, cov))
    return Network(n_nodes=n_nodes, edges=tuple(edges), directed=directed,
                   n_cov=n_cov)


def random_spec(rng: RngStream, max_p: int = 3, max_stage: int = 3,
                n_cov: int = 1, alpha_mode: str = "global",
                n_nodes: int | None = None) -> ModelSpec:
    p = 1 + int(rng.uniform() * max_p)
    s = tuple(int(rng.uniform() * (max_stage + 1)) for _ in range(p))
    groups = None
    if alpha_mode == "per_group":
        assert n_nodes is not None
        labels = ("odd", "even")
        groups = tuple((k, labels[k % 2]) for k in range(1, n_nodes + 1))
    return ModelSpec(p=p, s=s, n_cov=n_cov, alpha_mode=alpha_mode,
                     groups=groups)


def random_coefficients(rng: RngStream, spec: ModelSpec, n_nodes: int,
                        margin_below: float = 0.95,
                        sigma_scale: float = 1.0) -> CoefficientSet:
    """Coefficients rescaled so every node margin is below the target."""
    from gnar.model import n_alpha_units, n_beta_units

    units_a = n_alpha_units(spec, n_nodes)
    units_b = n_beta_units(spec)
    alpha = 2.0 * rng.uniforms(spec.p * units_a).reshape(spec.p, units_a) - 1.0
    beta = []
    for s_j in spec.s:
        block = 2.0 * rng.uniforms(s_j * spec.n_cov * units_b) - 1.0
        beta.append(block.reshape(s_j, spec.n_cov, units_b))
    sigma = sigma_scale * (0.5 + rng.uniforms(n_nodes))
    coef = make_coefficients(spec, n_nodes, alpha, beta, sigma)
    worst = float(np.max(stationarity_margin(spec, coef).margins))
    if worst < 1e-9:
        alpha[0, :] = 0.3
        coef = make_coefficients(spec, n_nodes, alpha, beta, sigma)
        worst = float(np.max(stationarity_margin(spec, coef).margins))
    target = margin_below * (0.4 + 0.59 * rng.uniform())
    factor = target / worst
    return make_coefficients(
        spec, n_nodes, alpha * factor, [b * factor for b in beta], sigma
    )


def random_instance(seed: int, max_nodes: int = 6, max_p: int = 3,
                    max_stage: int = 3, n_cov: int = 1,
                    alpha_mode: str = "global",
                    margin_below: float = 0.95):
    """Deterministic (network, spec, coefficients) triple for a seed."""
    rng = RngStream(seed)
    n_nodes = 3 + int(rng.uniform() * (max_nodes - 2))
    net = random_network(rng, n_nodes, n_cov=n_cov)
    spec = random_spec(rng, max_p=max_p, max_stage=max_stage, n_cov=n_cov,
                       alpha_mode=alpha_mode, n_nodes=n_nodes)
    coef = random_coefficients(rng, spec, n_nodes, margin_below=margin_below)
    return net, spec, coef


ACCEPTANCE_REPORT: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_REPORT:
        terminalreporter.write_line(line)
