"""State-context-property systems.

A system is a set of states, a set of contexts, a set of properties, a
transition law ``mu`` giving for each (state, context) a distribution over
(next state, next context), and an actuality map ``xi`` listing which
properties hold in each state.  A state is an eigenstate of a context when
the law keeps it fixed with certainty; otherwise it is a potentiality state
and an interaction actualizes one of several successors (collapse).

``sphere_as_scop`` realizes this for the elastic sphere: contexts are
measurement directions, eigenstates the direction endpoints, and properties
price intervals attached to the endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable, Mapping, Sequence

import numpy as np

from .geometry import UnitVector3, dot
from .sphere_model import RhoDistribution, rho_cdf

ROW_SUM_TOL = 1e-12


class UnknownStateError(ValueError):
    pass


class UnknownContextError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class PriceIntervalProperty:
    """The property of displaying a price inside (lower, upper)."""

    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError("price interval needs lower < upper")

    def contains_interval(self, other: "PriceIntervalProperty") -> bool:
        return self.lower <= other.lower and other.upper <= self.upper

    def overlaps(self, other: "PriceIntervalProperty") -> bool:
        return self.lower < other.upper and other.lower < self.upper


Transition = tuple[tuple[Hashable, Hashable], float]


@dataclass(frozen=True)
class ScopSystem:
    """States, contexts, properties plus the transition law and actuality map.

    ``states`` lists the materialized states; systems over a continuum keep
    it to the distinguished states and accept anything ``contains_state``
    admits.  ``mu(p, e)`` returns ((q, f), probability) pairs that must sum
    to one; ``xi(p)`` returns the set of actual properties.
    """

    contexts: tuple
    properties: frozenset
    mu: Callable[[Hashable, Hashable], Sequence[Transition]]
    xi: Callable[[Hashable], frozenset]
    states: tuple | None = None
    contains_state: Callable[[Hashable], bool] | None = None

    def _check_state(self, p):
        if self.contains_state is not None:
            if not self.contains_state(p):
                raise UnknownStateError(f"unknown state: {p!r}")
        elif self.states is not None and p not in self.states:
            raise UnknownStateError(f"unknown state: {p!r}")

    def _check_context(self, e):
        if e not in self.contexts:
            raise UnknownContextError(f"unknown context: {e!r}")

    def transition_distribution(self, p, e) -> list[Transition]:
        """The mu row for (p, e), validated to sum to 1 within 1e-12."""
        self._check_state(p)
        self._check_context(e)
        row = list(self.mu(p, e))
        total = sum(prob for _, prob in row)
        if abs(total - 1.0) > ROW_SUM_TOL:
            raise ValueError(f"mu row for ({p!r}, {e!r}) sums to {total!r}")
        if any(prob < 0 for _, prob in row):
            raise ValueError("mu probabilities must be nonnegative")
        return row

    @staticmethod
    def from_tables(states, contexts, properties,
                    mu_table: Mapping, xi_table: Mapping) -> "ScopSystem":
        """Finite system from explicit tables.

        ``mu_table`` maps (state, context) to {(next_state, next_context):
        probability}; ``xi_table`` maps state to an iterable of properties.
        """
        states = tuple(states)
        contexts = tuple(contexts)
        properties = frozenset(properties)
        mu_rows = {
            key: tuple((qf, float(prob)) for qf, prob in row.items())
            for key, row in mu_table.items()
        }
        xi_rows = {p: frozenset(xi_table.get(p, ())) for p in states}
        for p, actual in xi_rows.items():
            if not actual <= properties:
                raise ValueError(f"xi({p!r}) lists properties outside the property set")
        for p in states:
            for e in contexts:
                if (p, e) not in mu_rows:
                    raise ValueError(f"mu_table missing row for ({p!r}, {e!r})")
                total = sum(prob for _, prob in mu_rows[(p, e)])
                if abs(total - 1.0) > ROW_SUM_TOL:
                    raise ValueError(f"mu row for ({p!r}, {e!r}) sums to {total!r}")

        def mu(p, e):
            return mu_rows[(p, e)]

        def xi(p):
            return xi_rows[p]

        return ScopSystem(contexts=contexts, properties=properties,
                          mu=mu, xi=xi, states=states)


def is_eigenstate(sys: ScopSystem, p, e) -> bool:
    """True iff the law keeps p fixed with certainty under context e."""
    row = sys.transition_distribution(p, e)
    stay = sum(prob for (q, _), prob in row if q == p)
    return stay >= 1.0 - ROW_SUM_TOL


def transition(sys: ScopSystem, p, e, rng: np.random.Generator):
    """Sample one collapse: returns the successor (state, context)."""
    row = sys.transition_distribution(p, e)
    x = rng.random()
    acc = 0.0
    for qf, prob in row:
        acc += prob
        if x < acc:
            return qf
    return row[-1][0]


def actual_properties(sys: ScopSystem, p) -> frozenset:
    """The set xi(p) of properties actual in state p."""
    sys._check_state(p)
    return sys.xi(p)


def sphere_as_scop(rho: RhoDistribution, directions: Sequence[UnitVector3],
                   price_map) -> ScopSystem:
    """Sphere trading model as a SCoP system.

    Contexts are the measurement directions; the states u and -u are the
    two eigenstates of context u, and any other unit vector is a valid
    potentiality state (materialized on first visit).  ``price_map`` maps
    each direction and its antipode to a PriceIntervalProperty; the two
    intervals of an antipodal pair must be disjoint, since outcome O1
    asserts the price lies inside the interval at u and O2 asserts it lies
    outside.  xi of an eigenstate holds its own interval plus every
    superinterval present in the property set.
    """
    directions = list(directions)
    if not directions:
        raise ValueError("need at least one measurement direction")
    if callable(price_map) and not isinstance(price_map, Mapping):
        lookup = price_map
    else:
        mapping = dict(price_map)

        def lookup(d):
            try:
                return mapping[d]
            except KeyError:
                raise ValueError(f"price_map not defined for direction {d!r}") from None

    # canonical endpoint objects shared by antipodal contexts
    endpoints: dict[UnitVector3, UnitVector3] = {}
    contexts: list[UnitVector3] = []
    for u in directions:
        if u in contexts:
            continue
        contexts.append(u)
        endpoints.setdefault(u, u)
        endpoints.setdefault(-u, -u)

    xi_map: dict[UnitVector3, frozenset] = {}
    prop_of: dict[UnitVector3, PriceIntervalProperty] = {}
    for u in contexts:
        a_plus, a_minus = lookup(u), lookup(-u)
        if not isinstance(a_plus, PriceIntervalProperty) or not isinstance(a_minus, PriceIntervalProperty):
            raise TypeError("price_map must yield PriceIntervalProperty values")
        if a_plus.overlaps(a_minus):
            raise ValueError(
                f"inconsistent price_map: intervals for the antipodal pair at {u!r} overlap"
            )
        prop_of[endpoints[u]] = a_plus
        prop_of[endpoints[-u]] = a_minus
    properties = frozenset(prop_of.values())
    for state, own in prop_of.items():
        xi_map[state] = frozenset(a for a in properties if a.contains_interval(own))

    context_dirs = {e: e for e in contexts}

    def mu(p, e):
        u = context_dirs[e]
        p1 = rho_cdf(rho, dot(p, u))
        return (((endpoints[u], e), p1), ((endpoints[-u], e), 1.0 - p1))

    def xi(p):
        return xi_map.get(p, frozenset())

    return ScopSystem(
        contexts=tuple(contexts),
        properties=properties,
        mu=mu,
        xi=xi,
        states=tuple(endpoints.values()),
        contains_state=lambda p: isinstance(p, UnitVector3),
    )
