"""Discrete-event simulator of segment prefetching in a P2P VoD swarm."""

from .analytics import (AnalyticParams, HitRatioPair, evaluate, hr_mining,
                        hr_none, hr_popularity, hr_random, validate_against_sim)
from .domain import (SERVER, BufferCache, CacheEntry, Origin, PlaybackRecord,
                     Video, count_forward_seeks)
from .engine import ConfigError, RunConfig, Simulation, run, sweep
from .gossip import BufferMapMsg, StateTable, missing_segments, session_union
from .metrics import (MetricsLedger, MetricsReport, build_report, export_report,
                      global_hit_ratio, relative_hit_ratio, utilization_ratios)
from .overlay import Overlay, Peer, Session
from .strategies import (MiningModel, PeerView, PopularityList,
                         PopularityTracker, PrefetchPlan, mine_update,
                         plan_cooperative, plan_mining, plan_none,
                         plan_popularity, plan_random, tracker_update)
from .topology import NetworkTopology, TopologyParams, generate_topology
from .transfer import (FlowRegistry, SegmentRequest, TransferHistory,
                       choose_provider, score_provider, transfer_time)
from .workload import (ViewerTrace, WorkloadParams, generate_traces,
                       load_traces, parse_traces, save_traces)

__version__ = "0.1.0"
