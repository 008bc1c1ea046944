"""Billboard slot and advertisement tag selection over trajectory databases.

Pick k billboard slots and l ad tags that jointly maximise the expected
number of influenced users, with exhaustive, greedy (incremental and lazy),
and sampled greedy solvers plus a set of ranking/random baselines.
"""

from ._kernels import BACKEND
from .baselines import (BASELINE_KINDS, run_baseline, singleton_influence_rankings,
                        slot_coverage, tag_frequency)
from .domain import (Billboard, BbinfError, CapExceededError, GeoPoint,
                     InfeasibleBudgetError, InfluenceInstance, IngestError,
                     Selection, Slot, TagRecord, TimeInterval, TrajectoryTuple,
                     haversine_m, validate_instance)
from .influence import (SurvivalState, aggregated_influence, base_slot_influence,
                        commit_slot, commit_tag, marginal_gain_slot,
                        marginal_gain_tag, new_state, user_probability)
from .ingest import (IngestConfig, SyntheticSpec, assemble_instance,
                     build_visibility, derive_base_probabilities, enumerate_slots,
                     generate_synthetic, load_billboards, load_instance,
                     load_tags, load_trajectories, save_instance)
from .solvers import (SolveResult, StochasticParams, exhaustive_search,
                      greedy_select_slots, greedy_select_tags, orthant_greedy,
                      stochastic_greedy)

__version__ = "0.1.0"
