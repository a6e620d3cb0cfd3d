"""Shared test utilities: independent oracles and small network builders.

The oracles never call the scheduling code under test: final durations are
computed from hand-derived structural formulas per fixture, and scenario
probabilities by exhaustive enumeration of the discrete atoms.
"""

from __future__ import annotations

import itertools

from sedm.network import Activity, Discrete, ProjectNetwork, Triangular, validated


def chain(pds, dist_factory=None, costs=None) -> ProjectNetwork:
    """Serial chain A1 -> A2 -> ... with the given planned durations."""
    activities = []
    prev: tuple[str, ...] = ()
    for k, pd in enumerate(pds):
        aid = f"A{k + 1}"
        dist = (
            dist_factory(pd)
            if dist_factory
            else Triangular(pd * 0.5, float(pd), pd * 1.5)
        )
        cost = costs[k] if costs else None
        activities.append(Activity(aid, pd, dist, prev, cost_per_period=cost))
        prev = (aid,)
    return validated(ProjectNetwork(activities, name="chain"))


def parallel(pds) -> ProjectNetwork:
    """Independent activities with no precedence."""
    activities = [
        Activity(f"P{k + 1}", pd, Triangular(pd * 0.5, float(pd), pd * 1.5))
        for k, pd in enumerate(pds)
    ]
    return validated(ProjectNetwork(activities, name="parallel"))


def point_mass(value: float) -> Discrete:
    return Discrete(((float(value), 1.0),))


def enumerate_scenarios(network: ProjectNetwork):
    """All (durations, probability) combinations of a discrete network."""
    ids = [a.id for a in network.activities]
    atom_lists = [a.distribution.atoms for a in network.activities]
    for combo in itertools.product(*atom_lists):
        durations = {i: v for i, (v, _) in zip(ids, combo)}
        prob = 1.0
        for _, p in combo:
            prob *= p
        yield durations, prob


# Hand-derived final-duration formulas (independent of the CPM code).

def afd_chain(durations: dict) -> float:
    """Serial X -> Y -> Z."""
    return durations["X"] + durations["Y"] + durations["Z"]


def afd_parallel_xyz(durations: dict) -> float:
    """X -> {Y, Z} fan-out."""
    return durations["X"] + max(durations["Y"], durations["Z"])


def oracle_outcomes(network: ProjectNetwork, afd_fn, bpd: float):
    """Exhaustive (probability, afd, delay_flag) triples."""
    rows = []
    for durations, prob in enumerate_scenarios(network):
        afd = afd_fn(durations)
        rows.append((prob, afd, 1 if afd > bpd else 0))
    total = sum(p for p, _, _ in rows)
    assert abs(total - 1.0) < 1e-12
    return rows


def oracle_p_delay(rows) -> float:
    return sum(p for p, _, d in rows if d == 1)


def oracle_mean_afd(rows) -> float:
    return sum(p * afd for p, afd, _ in rows)
