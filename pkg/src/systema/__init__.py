"""Parameterized multiparty session types: parsing, projection, realizability checks
and a bounded trace-equality oracle."""
from systema.ast import (
    EMPTY, Choice, ChoiceN, Cond, Empty, Exp, Interaction, MessageLabel, Parallel, ParallelN,
    ProcessName, Recv, Send, Seq, SeqN, Shuffle, ShuffleN, Star, Term, participants, substitute,
    well_formed,
)
from systema.errors import CapExceeded, Diagnostic, ParseError, SystemAError, UnboundParameterError
from systema.kernel import BACKEND
from systema.normalize import canonical, eliminate_epsilon, equivalent, normalize
from systema.parser import (
    Protocol, from_json, parse_global, parse_local, parse_protocol, print_term, to_json,
)
from systema.projection import project, project_env
from systema.realizability import (
    Verdict, check_cp, check_kp, check_pp, check_pr, check_sp,
)
from systema.semantics import Report, env_traces, ready_actions, verify
from systema.trace import (
    Event, InstantiationConfig, TraceSet, distinctive_point, first_set, instantiate, last_set,
    member, project_trace, traces,
)

__version__ = "0.1.0"
