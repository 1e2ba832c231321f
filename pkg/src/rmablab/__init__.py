"""Policy laboratory for hidden-Markov restless bandit models of
online recommendation."""

from .core import (
    ArmModel,
    BanditInstance,
    Belief,
    Observation,
    belief_update_passive,
    belief_update_play,
    drift_warning_count,
    expected_reward,
    reset_drift_warnings,
)
from .errors import (
    ConfigError,
    DimensionMismatchError,
    ImpossibleObservationError,
    NoCrossingInBracketError,
    NonMonotoneIndexWarning,
    TreeTooLargeError,
)
from .experiments import (
    ExperimentConfig,
    InstanceRef,
    PolicySpec,
    RunResult,
    config_from_dict,
    config_to_dict,
    load_instance_file,
    parse_config,
    resolve_instance,
    run,
)
from .instances import (
    BUILTIN_NAMES,
    RandomInstanceSpec,
    builtin_instance,
    generate_instance,
)
from .policies import (
    MyopicPolicy,
    Policy,
    PolicyDecision,
    RandomPolicy,
    RolloutConfig,
    RolloutEstimate,
    RolloutPolicy,
    WhittleConfig,
    WhittleIndexPolicy,
    mc_rollout_select,
    myopic_select,
    random_select,
    rollout_trajectory,
    whittle_index,
    whittle_select,
)
from .sim import (
    EnvState,
    EvalReport,
    StepRecord,
    env_step,
    evaluate,
    exact_forced_return,
    exact_value_oracle,
    run_episode,
)

__version__ = "0.1.0"
