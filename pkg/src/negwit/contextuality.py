"""Measurement scenarios, empirical models, and the contextual fraction.

The noncontextual fraction is the optimum of a linear program over
subdistributions on global assignments; its dual, after the standard
change of variables, is a generalised Bell form with bound zero whose
normalised violation equals the contextual fraction.  Everything here is
finite and dense; global assignments are enumerated lazily with a hard
cap.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

GLOBAL_CAP = 10**6
COMPAT_TOL = 1e-9


@dataclass(frozen=True)
class Scenario:
    """Measurement labels, maximal contexts (an antichain cover), outcomes."""

    labels: tuple
    contexts: tuple  # tuples of labels
    outcomes: dict   # label -> tuple of outcome symbols

    def __post_init__(self):
        labels = tuple(self.labels)
        contexts = tuple(tuple(c) for c in self.contexts)
        covered = set().union(*map(set, contexts)) if contexts else set()
        if covered != set(labels):
            raise ValueError("contexts must cover the label set")
        for c in contexts:
            for c2 in contexts:
                if c != c2 and set(c) <= set(c2):
                    raise ValueError("contexts must form an antichain")
        outcomes = {x: tuple(self.outcomes[x]) for x in labels}
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "contexts", contexts)
        object.__setattr__(self, "outcomes", outcomes)

    def sections(self, context) -> list:
        return list(itertools.product(*(self.outcomes[x] for x in context)))

    def n_global(self) -> int:
        out = 1
        for x in self.labels:
            out *= len(self.outcomes[x])
        return out

    def global_assignments(self):
        if self.n_global() > GLOBAL_CAP:
            raise ValueError("global assignment space exceeds the cap")
        for combo in itertools.product(*(self.outcomes[x] for x in self.labels)):
            yield dict(zip(self.labels, combo))

    def row_index(self) -> list:
        """Flattened (context, section) row labels in a fixed order."""
        rows = []
        for c in self.contexts:
            for s in self.sections(c):
                rows.append((c, s))
        return rows


@dataclass(frozen=True)
class EmpiricalModel:
    """Per-context probability tables satisfying no-disturbance."""

    scenario: Scenario
    tables: dict  # context tuple -> {section tuple: probability}

    def __post_init__(self):
        tables = {}
        for c in self.scenario.contexts:
            table = dict(self.tables[tuple(c)])
            total = sum(table.values())
            if abs(total - 1.0) > COMPAT_TOL:
                raise ValueError(f"table for context {c} sums to {total}")
            if any(v < -COMPAT_TOL for v in table.values()):
                raise ValueError("negative probability")
            tables[tuple(c)] = table
        object.__setattr__(self, "tables", tables)
        _check_compatibility(self.scenario, tables)

    def prob(self, context, section) -> float:
        return self.tables[tuple(context)].get(tuple(section), 0.0)

    def vector(self) -> np.ndarray:
        rows = self.scenario.row_index()
        return np.array([self.prob(c, s) for c, s in rows])

    def to_json(self) -> str:
        sc = self.scenario
        return json.dumps(
            {
                "labels": list(sc.labels),
                "contexts": [list(c) for c in sc.contexts],
                "outcomes": {str(x): list(sc.outcomes[x]) for x in sc.labels},
                "tables": [
                    {
                        "context": list(c),
                        "rows": [[list(s), p] for s, p in sorted(tab.items(), key=str)],
                    }
                    for c, tab in self.tables.items()
                ],
            },
            indent=1,
        )

    @staticmethod
    def from_json(text: str) -> "EmpiricalModel":
        raw = json.loads(text)
        labels = tuple(raw["labels"])
        scenario = Scenario(
            labels=labels,
            contexts=tuple(tuple(c) for c in raw["contexts"]),
            outcomes={x: tuple(raw["outcomes"][str(x)]) for x in labels},
        )
        tables = {}
        for entry in raw["tables"]:
            c = tuple(entry["context"])
            tables[c] = {tuple(s): float(p) for s, p in entry["rows"]}
        return EmpiricalModel(scenario, tables)


def _check_compatibility(scenario: Scenario, tables) -> None:
    for c1 in scenario.contexts:
        for c2 in scenario.contexts:
            shared = tuple(x for x in c1 if x in c2)
            if not shared or c1 >= c2:
                continue
            m1 = _marginal(scenario, tables, c1, shared)
            m2 = _marginal(scenario, tables, c2, shared)
            for key in set(m1) | set(m2):
                if abs(m1.get(key, 0.0) - m2.get(key, 0.0)) > COMPAT_TOL:
                    raise ValueError(
                        f"incompatible marginals on {shared} between {c1} and {c2}"
                    )


def _marginal(scenario, tables, context, shared):
    idx = [context.index(x) for x in shared]
    out = {}
    for s, p in tables[tuple(context)].items():
        key = tuple(s[i] for i in idx)
        out[key] = out.get(key, 0.0) + p
    return out


def incidence(scenario: Scenario) -> np.ndarray:
    """0/1 matrix: rows (context, section), columns global assignments."""
    rows = scenario.row_index()
    cols = list(scenario.global_assignments())
    M = np.zeros((len(rows), len(cols)), dtype=np.int8)
    for j, g in enumerate(cols):
        for i, (c, s) in enumerate(rows):
            if tuple(g[x] for x in c) == tuple(s):
                M[i, j] = 1
    return M


def ncf(model: EmpiricalModel):
    """Noncontextual fraction by LP; returns (ncf, cf, subdistribution b)."""
    M = incidence(model.scenario).astype(float)
    v = model.vector()
    ncols = M.shape[1]
    res = linprog(
        c=-np.ones(ncols),
        A_ub=M,
        b_ub=v,
        bounds=[(0, None)] * ncols,
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"noncontextual-fraction LP failed: {res.message}")
    value = min(max(float(-res.fun), 0.0), 1.0) + 0.0  # normalise -0.0
    return value, 1.0 - value, np.maximum(res.x, 0.0)


@dataclass(frozen=True)
class BellForm:
    """Generalised Bell functional with bound R; a . v <= R classically."""

    scenario: Scenario
    coefficients: np.ndarray
    bound: float = 0.0

    def norm(self) -> float:
        rows = self.scenario.row_index()
        total = 0.0
        start = 0
        for c in self.scenario.contexts:
            k = len(self.scenario.sections(c))
            total += float(np.max(self.coefficients[start : start + k]))
            start += k
        return total

    def value(self, model: EmpiricalModel) -> float:
        return float(self.coefficients @ model.vector())

    def normalised_violation(self, model: EmpiricalModel) -> float:
        denom = self.norm() - self.bound
        if denom <= 0:
            return 0.0
        return max(0.0, self.value(model) - self.bound) / denom


def bell_inequality(model: EmpiricalModel) -> BellForm:
    """Dual-optimal Bell form with bound 0 and maximal normalised violation.

    Built from the duals of the noncontextual-fraction LP by the standard
    shift a = 1/|contexts| - y, so that M^T a <= 0 columnwise and the
    normalised violation equals the contextual fraction.
    """
    M = incidence(model.scenario).astype(float)
    v = model.vector()
    ncols = M.shape[1]
    res = linprog(
        c=-np.ones(ncols),
        A_ub=M,
        b_ub=v,
        bounds=[(0, None)] * ncols,
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"noncontextual-fraction LP failed: {res.message}")
    y = -np.array(res.ineqlin.marginals)  # optimal duals, >= 0
    a = np.full(len(v), 1.0 / len(model.scenario.contexts)) - y
    return BellForm(scenario=model.scenario, coefficients=a, bound=0.0)


def bin_outcomes(model: EmpiricalModel, maps: dict) -> EmpiricalModel:
    """Push the model through per-label outcome coarse-grainings.

    maps[label] is a total function old outcome -> new outcome; shared
    labels keep compatibility because marginals push forward.
    """
    sc = model.scenario
    new_outcomes = {}
    for x in sc.labels:
        fx = maps[x]
        missing = [o for o in sc.outcomes[x] if o not in fx]
        if missing:
            raise ValueError(f"map for label {x} is not total: missing {missing}")
        new_outcomes[x] = tuple(sorted({fx[o] for o in sc.outcomes[x]}, key=str))
    new_scenario = Scenario(sc.labels, sc.contexts, new_outcomes)
    new_tables = {}
    for c in sc.contexts:
        table = {}
        for s, p in model.tables[tuple(c)].items():
            key = tuple(maps[x][o] for x, o in zip(c, s))
            table[key] = table.get(key, 0.0) + p
        new_tables[tuple(c)] = table
    return EmpiricalModel(new_scenario, new_tables)


# ---------------------------------------------------------------------------
# stock models
# ---------------------------------------------------------------------------


def bell_scenario_222() -> Scenario:
    return Scenario(
        labels=("a1", "a2", "b1", "b2"),
        contexts=(("a1", "b1"), ("a1", "b2"), ("a2", "b1"), ("a2", "b2")),
        outcomes={x: (0, 1) for x in ("a1", "a2", "b1", "b2")},
    )


def example_model(name: str) -> EmpiricalModel:
    """Stock empirical models on the (2,2,2) Bell scenario."""
    sc = bell_scenario_222()
    if name == "chsh":
        e1 = (2.0 + math.sqrt(2.0)) / 8.0
        e2 = (2.0 - math.sqrt(2.0)) / 8.0
        row_a = {(0, 0): e1, (0, 1): e2, (1, 0): e2, (1, 1): e1}
        row_b = {(0, 0): e2, (0, 1): e1, (1, 0): e1, (1, 1): e2}
        tables = {
            ("a1", "b1"): dict(row_a),
            ("a1", "b2"): dict(row_a),
            ("a2", "b1"): dict(row_a),
            ("a2", "b2"): dict(row_b),
        }
    elif name == "pr_box":
        corr = {(0, 0): 0.5, (1, 1): 0.5}
        anti = {(0, 1): 0.5, (1, 0): 0.5}
        tables = {
            ("a1", "b1"): dict(corr),
            ("a1", "b2"): dict(corr),
            ("a2", "b1"): dict(corr),
            ("a2", "b2"): dict(anti),
        }
    elif name == "hardy":
        # possibilistic structure: (1,1) possible in the first context but
        # never extendable; rows are a standard no-signalling realisation
        quarter = {(0, 0): 0.25, (0, 1): 0.25, (1, 0): 0.25, (1, 1): 0.25}
        half = {(0, 1): 0.5, (1, 0): 0.5}
        tables = {
            ("a1", "b1"): dict(quarter),
            ("a1", "b2"): dict(half),
            ("a2", "b1"): dict(half),
            ("a2", "b2"): dict(half),
        }
    elif name == "identity_mix":
        uniform = {(i, j): 0.25 for i in (0, 1) for j in (0, 1)}
        tables = {tuple(c): dict(uniform) for c in sc.contexts}
    else:
        raise ValueError(f"unknown example model {name!r}")
    return EmpiricalModel(sc, tables)


def cyclic_scenario(n_labels: int = 3, n_outcomes: int = 3) -> Scenario:
    labels = tuple(f"x{i}" for i in range(n_labels))
    contexts = tuple(
        (labels[i], labels[(i + 1) % n_labels]) for i in range(n_labels)
    )
    return Scenario(labels, contexts, {x: tuple(range(n_outcomes)) for x in labels})


def random_compatible_model(rng, n_labels=3, n_outcomes=3) -> EmpiricalModel:
    """Random mixture of deterministic and shift models on a cyclic scenario.

    Shift models (context i uniform on pairs (a, a + s_i)) are compatible by
    construction and strongly contextual when the shifts do not cancel, so
    mixtures explore the whole contextuality range.
    """
    sc = cyclic_scenario(n_labels, n_outcomes)
    components = []
    for _ in range(3):  # deterministic globals
        g = {x: int(rng.integers(n_outcomes)) for x in sc.labels}
        tables = {}
        for c in sc.contexts:
            tables[tuple(c)] = {tuple(g[x] for x in c): 1.0}
        components.append(tables)
    for _ in range(3):  # cyclic shifts
        shifts = [int(rng.integers(n_outcomes)) for _ in range(len(sc.contexts))]
        tables = {}
        for (c, s) in zip(sc.contexts, shifts):
            tables[tuple(c)] = {
                (a, (a + s) % n_outcomes): 1.0 / n_outcomes
                for a in range(n_outcomes)
            }
        components.append(tables)
    weights = rng.dirichlet(np.ones(len(components)))
    mixed = {}
    for c in sc.contexts:
        table = {}
        for w, tab in zip(weights, components):
            for s, p in tab[tuple(c)].items():
                table[s] = table.get(s, 0.0) + float(w) * p
        mixed[tuple(c)] = table
    return EmpiricalModel(sc, mixed)
