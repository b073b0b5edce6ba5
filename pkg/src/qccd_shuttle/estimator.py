"""scikit-learn style front end.

``NativeCompiler`` is a stateless transformer from circuits to native
circuits; ``ShuttleScheduler`` takes native circuits and predicts schedules.
Both keep their constructor arguments as plain attributes so ``get_params``,
``set_params`` and ``clone`` work as usual.
"""
from __future__ import annotations

from typing import Iterable

from sklearn.base import BaseEstimator, TransformerMixin

from .arch_graph import ArchGraph, GridSpec, build_grid_graph
from .circuit.model import Circuit
from .circuit.passes import compile_circuit
from .exceptions import ValidationError
from .placement import IonPlacement, chains_for_occupancy, random_placement
from .scheduler import Schedule, SchedulerConfig, run_schedule


def _as_list(X) -> list[Circuit]:
    if isinstance(X, Circuit):
        return [X]
    out = list(X)
    for c in out:
        if not isinstance(c, Circuit):
            raise ValidationError(f"expected Circuit objects, got {type(c).__name__}", field="X")
    return out


class NativeCompiler(TransformerMixin, BaseEstimator):
    """Swap elimination, native decomposition and peephole merging.

    ``transform`` returns the native circuits; the wire permutation left by
    removed SWAPs of the last call is kept in ``permutations_``.
    """

    def fit(self, X=None, y=None):
        return self

    def transform(self, X) -> list[Circuit]:
        out, perms = [], []
        for c in _as_list(X):
            native, perm = compile_circuit(c)
            out.append(native)
            perms.append(perm)
        self.permutations_ = perms
        return out


class ShuttleScheduler(BaseEstimator):
    """Build time-stepped shuttling schedules on one grid architecture.

    Parameters
    ----------
    arch : GridSpec or dict
        Architecture description.
    occupancy : float
        Fraction of memory edges holding a chain; must leave at least one
        chain per qubit.
    seed : int
        Seed of the random initial placement.
    duration_1q, duration_2q, max_queue_len, recompute_queue_each_step, max_steps_guard
        Forwarded to :class:`SchedulerConfig`.

    Attributes
    ----------
    graph_ : ArchGraph
    config_ : SchedulerConfig
    placements_ : list of IonPlacement
        Initial placements used by the last ``predict`` call.
    """

    def __init__(
        self,
        arch=None,
        occupancy: float = 0.5,
        seed: int = 0,
        duration_1q: int = 1,
        duration_2q: int = 1,
        max_queue_len: int | None = None,
        recompute_queue_each_step: bool = False,
        max_steps_guard: int | None = None,
    ):
        self.arch = arch
        self.occupancy = occupancy
        self.seed = seed
        self.duration_1q = duration_1q
        self.duration_2q = duration_2q
        self.max_queue_len = max_queue_len
        self.recompute_queue_each_step = recompute_queue_each_step
        self.max_steps_guard = max_steps_guard

    def fit(self, X=None, y=None):
        """Validate the parameters and build the architecture graph."""
        arch = self.arch if self.arch is not None else GridSpec(3, 3, 1, 1)
        if not isinstance(arch, GridSpec):
            arch = GridSpec.from_dict(arch)
        self.graph_: ArchGraph = build_grid_graph(arch.validate())
        self.config_ = SchedulerConfig(
            duration_1q=self.duration_1q,
            duration_2q=self.duration_2q,
            max_queue_len=self.max_queue_len,
            recompute_queue_each_step=self.recompute_queue_each_step,
            max_steps_guard=self.max_steps_guard,
        ).validate()
        self.chain_count_ = chains_for_occupancy(self.graph_, self.occupancy)
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "graph_"):
            raise ValidationError("call fit before predict", field="estimator")

    def placement_for(self, circuit: Circuit) -> IonPlacement:
        self._check_fitted()
        if circuit.qubit_count > self.chain_count_:
            raise ValidationError(
                f"occupancy {self.occupancy} gives {self.chain_count_} chains, "
                f"fewer than the circuit's {circuit.qubit_count} qubits",
                field="occupancy",
            )
        return random_placement(self.graph_, self.chain_count_, self.seed)

    def predict(self, X) -> list[Schedule]:
        """One schedule per native circuit in ``X``."""
        self._check_fitted()
        out = []
        self.placements_ = []
        for c in _as_list(X):
            p = self.placement_for(c)
            self.placements_.append(p)
            out.append(run_schedule(self.graph_, c, p, self.config_))
        return out

    def score(self, X: Iterable[Circuit], y=None) -> float:
        """Negative mean schedule length (higher is better)."""
        schedules = self.predict(X)
        return -sum(s.T_hat for s in schedules) / max(1, len(schedules))
