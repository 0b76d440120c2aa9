"""Online ranking under discrete-choice and Spearman feedback.

A weight-per-item learner feeds a randomized sorting procedure each round;
both provided procedures (noisy quicksort and Plackett-Luce sampling) give
every item pair a logistic ordering marginal in the weight difference,
which is what drives the sqrt-horizon regret guarantee.  Baselines,
adversary generators, hindsight/regret accounting, and a reproducible
experiment harness round out the package.
"""

from .core import (
    Feedback,
    Ranking,
    Setting,
    complexity_bound,
    feedback_complexity,
    pairwise_loss,
    pairwise_loss_term,
    position_loss,
    rank_by_scores,
)
from .environments import (
    FeedbackSequence,
    TraceError,
    load_trace,
    save_trace,
    spearman_sequence,
    uniform_k_choice,
    uniform_single_choice,
)
from .evaluation import (
    BoundReport,
    RunRecord,
    expected_step_loss_uniform,
    hindsight_best,
    marginal_test,
    regret_lower_bound,
    regret_upper_bound,
    total_pairwise_loss,
    total_position_loss,
)
from .harness import ExperimentConfig, play, run, sweep
from .learners import (
    ExplicitMw,
    Fpl,
    FplConfig,
    LearnerConfig,
    OnlineRank,
    learning_rate,
    make_learner,
)
from .samplers import (
    RngStream,
    pairwise_marginal,
    plackett_luce_gumbel,
    plackett_luce_log_prob,
    plackett_luce_sample,
    quicksort_sample,
    sample_positions,
)

__version__ = "0.1.0"

__all__ = [
    "Feedback",
    "Ranking",
    "Setting",
    "complexity_bound",
    "feedback_complexity",
    "pairwise_loss",
    "pairwise_loss_term",
    "position_loss",
    "rank_by_scores",
    "FeedbackSequence",
    "TraceError",
    "load_trace",
    "save_trace",
    "spearman_sequence",
    "uniform_k_choice",
    "uniform_single_choice",
    "BoundReport",
    "RunRecord",
    "expected_step_loss_uniform",
    "hindsight_best",
    "marginal_test",
    "regret_lower_bound",
    "regret_upper_bound",
    "total_pairwise_loss",
    "total_position_loss",
    "ExperimentConfig",
    "play",
    "run",
    "sweep",
    "ExplicitMw",
    "Fpl",
    "FplConfig",
    "LearnerConfig",
    "OnlineRank",
    "learning_rate",
    "make_learner",
    "RngStream",
    "pairwise_marginal",
    "plackett_luce_gumbel",
    "plackett_luce_log_prob",
    "plackett_luce_sample",
    "quicksort_sample",
    "sample_positions",
    "__version__",
]
