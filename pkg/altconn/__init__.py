# pyright: reportUnusedImport=none

from .bounds import (BoundValue, RateReport, baseline_separate, bound_values, capacity_spcu,
                     combined_bound, genie_bound_B, genie_bound_rest, sum_capacity)
from .channel import (ChannelRealization, Seeds, apply_channel, proportional_counts,
                      proportional_trace, sample_channel, sample_trace)
from .codec import (Assignments, DecodeResult, FallbackAssignment, Observation, S1Assignment,
                    SingularSystem, decode, encode, exhaustive_decodability, fallback_decode,
                    fallback_encode, s1_decode, s1_encode, s1_system, successive_decode_order,
                    transmit)
from .config import ConfigError, ExperimentConfig, load_config_file, sim_threads
from .jess import JessReport, cyclic_jess_demo
from .messages import MessageSource, SourceExhausted, SymbolId
from .pipeline import DecodeFailure, Mode, Scheme, require_success, run_end_to_end, run_trace
from .report import ReportRecord, write_sweep_csv
from .scheduler import (FallbackUse, Role, S1Block, Schedule, build_schedule, count_symbols,
                        lambda_of, proportional_symbols, separate_schedule)
from .states import (InvalidDistribution, Link, LinkSet, StateDistribution, StateId, StateTrace,
                     link_mask, make_proportional_trace, state_links)
from .sweep import SweepRow, aggregate, run_repetitions, run_sweep
