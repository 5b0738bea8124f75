"""Multilevel graph partitioning with a distributed steady-state
evolutionary layer on top."""

from .graph import (Graph, Partition, Clustering, GraphFormatError,
                    load_metis, save_metis, write_partition, cut_value,
                    is_feasible, cut_edge_set, overlay_clustering,
                    quotient_graph, partition_distance, connected_components,
                    compute_l_max)
from .coarsen import (Matching, Hierarchy, StopRule, rate_edge, gpa_matching,
                      contract, build_hierarchy)
from .initial import greedy_bisect, initial_partition
from .refine import (FlowProblem, fm_refine, multitry_fm, flow_pair_refine,
                     refine_all_pairs, max_flow_min_cut)
from .multilevel import PartitionerConfig, partition, fcycle, combine_core
from .natural_cuts import (ENC, EncIndex, NaturalCutState,
                           discover_natural_cuts, stage1_clustering,
                           stage2_clustering, preprocess_contract)
from .evolution import (Individual, Population, OperatorRatios,
                        tournament_select, evict_insert, pick_operator,
                        combine_c1, combine_c2, combine_c3,
                        mutate_m1, mutate_m2)
from .engine import (EngineConfig, EngineError, ConvergenceEvent, Mailbox,
                     WorkerState, estimate_population_size,
                     quick_start_exchange, rumor_spread_step, run)
from .analysis import (NormalizedSequence, min_prefix, normalize,
                       event_geomean, pseudo_speedup)

__version__ = "0.1.0"
