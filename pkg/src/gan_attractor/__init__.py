"""Attractor networks of neurons with multiple internal bit variables.

Simulation (bit-packed synchronous dynamics, Hebbian and margin-perceptron
training, a four-state Hopfield baseline), experiment harness (basin-of-
attraction curves, feed-forward equivalence), and the closed-form storage
capacity equations with their numerical solvers.
"""

__version__ = "0.1.0"

from .capacity import (
    BracketError,
    CapacityParams,
    CapacitySolution,
    alpha_critical,
    capacity_interacting,
    capacity_simple,
    entropy_bits,
    erfc,
    solve_aux,
    solve_gen_aux,
)
from .characteristic import (
    CharacteristicSpec,
    ConditionReport,
    MomentEstimate,
    check_conditions,
    estimate_moments,
    eval_characteristic,
    value_table,
)
from .core import (
    GanSpec,
    Network,
    PatternSet,
    build_network,
    hamming_distance,
    perturb_state,
    random_pattern_set,
)
from .dynamics import (
    AttractorResult,
    MarginReport,
    local_field,
    pack_state,
    run_to_attractor,
    stability_margins,
    step_continuous,
    step_reference,
    step_sync,
    unpack_state,
)
from .experiments import (
    BasinConfig,
    BasinCurve,
    FfNet,
    basin_curve,
    build_ff_equivalent,
    verify_ff_equivalence,
)
from .learning import LearnConfig, TrainResult, hebb_internal, hebb_weights, perceptron_train
from .multistate import (
    MultiStateNetwork,
    multistate_distance,
    multistate_hebb,
    multistate_run,
    multistate_step,
    perturb_states,
    quantize,
    random_state_patterns,
)
from .seeding import RunSeed
