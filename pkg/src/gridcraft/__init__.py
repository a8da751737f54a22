"""gridcraft: a deterministic voxel building-zone environment.

The agent stands in an 11 x 11 x 9 zone, navigates in one of three
control modes, and places/breaks colored blocks to reproduce a target
structure described by a dialog. Reward follows the maximal intersection
between the built and target structures over all relative translations
and vertical rotations. The package also ships the evaluation harness for
builder runs (S_r, S_s, S_c) and architect utterances (BLEU, keyword
precision/recall), plus a CLI for running, replaying and scoring.
"""
from .dynamics import (
    Action,
    AgentPose,
    ContinuousAction,
    ControlMode,
    DiscreteAction,
    HumanAction,
    apply_motion,
    resolve_use,
)
from .environment import (
    BuilderEnv,
    EnvConfig,
    Observation,
    StepInfo,
    StepResult,
    load_default_config,
)
from .errors import (
    AirBlock,
    AirCell,
    EmptyCorpus,
    EmptyInput,
    EpisodeFinished,
    GridcraftError,
    InvalidTask,
    MismatchError,
    ModeMismatch,
    OccupiedCell,
    ParseError,
    ValidationError,
)
from .matching import (
    MatchResult,
    MatchTable,
    RewardConfig,
    max_intersection,
    step_reward,
)
from .metrics import (
    BuilderScores,
    KeywordLexicon,
    KeywordPR,
    architect_report,
    bleu,
    bleu_scores,
    builder_scores,
    completion_rate,
    keyword_pr,
    normalized_hamming,
    reward_score,
    success_score,
    tokenize,
)
from .tasks import (
    EpisodeRecord,
    EpisodeStep,
    SubgoalQueue,
    Task,
    Utterance,
    generate_fixtures,
    load_episodes,
    load_tasks,
    save_episodes,
    save_tasks,
)
from .voxel import (
    AIR,
    COLOR_NAMES,
    N_COLORS,
    ZONE_SHAPE,
    CellCoord,
    VoxelGrid,
    break_block,
    nonair,
    place_block,
    rotate_y,
)

__version__ = "0.1.0"
