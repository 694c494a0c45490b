"""
Reproducible multi-trial experiments.

Every trial owns two random streams derived from the master seed, one for its
graph and one for the protocol, so a trial's result only depends on
(master_seed, trial index) and never on which worker ran it. Reports are
assembled in trial order.
"""

import csv
import json
import math
import multiprocessing
import sys
from dataclasses import dataclass, field, asdict

import numpy as np

from pushcast import __version__
from pushcast import log
from pushcast.bounds import median_mean_diagnostic
from pushcast.graph import complete_graph, generate_gnp, gnp_probability
from pushcast.phases import PhaseParams, detect_phases, detect_phases_from_counts, predicted_broadcast_time, deviation_band
from pushcast.push import Trace, run_push
from pushcast.typicality import finishing_stay_probability
from pushcast.util import InvalidParameterException, check_seed, make_rng, mix_seed

FORMATS = ('json', 'csv')
CSV_HEADER = ['trial', 'T', 'T1', 'T2', 'Tprime', 'stalled']
QUANTILES = (0.1, 0.25, 0.5, 0.75, 0.9)


@dataclass
class RunConfig:
    n: int
    p: float = None
    alpha: float = None
    complete: bool = False
    trials: int = 1
    master_seed: int = 0
    start: int = 0
    epsilon: float = None
    fixed_graph: bool = False
    record_traces: bool = False
    # Not part of the echo: none of them changes a result
    parallelism: int = field(default=1, compare=False)
    output_format: str = field(default='json', compare=False)
    output_path: str = field(default='-', compare=False)

    @property
    def density(self):
        if self.complete:
            return 'complete'
        return 'alpha' if self.alpha is not None else 'p'

    def validate(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise InvalidParameterException("n must be a positive integer, got {!r}".format(self.n))
        given = sum([self.p is not None, self.alpha is not None, bool(self.complete)])
        if given != 1:
            raise InvalidParameterException("exactly one of p, alpha or complete must be given")
        if self.p is not None and not self.p > 0.0:
            raise InvalidParameterException("edge probability must be positive, got {}".format(self.p))
        if self.alpha is not None and not self.alpha > 0.0:
            raise InvalidParameterException("alpha must be positive, got {}".format(self.alpha))
        if not isinstance(self.trials, (int, np.integer)) or self.trials < 1:
            raise InvalidParameterException("trials must be at least 1, got {!r}".format(self.trials))
        check_seed(self.master_seed)
        if not 0 <= self.start < self.n:
            raise InvalidParameterException("start vertex {} out of range [0, {})".format(self.start, self.n))
        if self.epsilon is not None and not 0.0 < self.epsilon <= 1.0:
            raise InvalidParameterException("epsilon must lie in (0, 1], got {}".format(self.epsilon))
        if self.parallelism < 1:
            raise InvalidParameterException("parallelism must be at least 1, got {}".format(self.parallelism))
        if self.output_format not in FORMATS:
            raise InvalidParameterException("unknown output format '{}', must be one of {}".format(self.output_format, ', '.join(FORMATS)))
        return self

    def edge_probability(self):
        """
        The p actually used, clamped to 1.
        """
        if self.complete:
            return 1.0
        if self.alpha is not None:
            return gnp_probability(self.n, self.alpha)
        return min(float(self.p), 1.0)

    def effective_alpha(self):
        """
        α as given, or p·n / ln n for the other density forms.
        """
        if self.alpha is not None:
            return float(self.alpha)
        if self.n < 2:
            return None
        return self.edge_probability() * self.n / math.log(self.n)

    def phase_params(self):
        alpha = self.effective_alpha()
        if self.epsilon is not None:
            return PhaseParams(epsilon=self.epsilon, alpha=alpha)
        if alpha is None:
            return PhaseParams(epsilon=1.0)
        if alpha < 1.0:
            log.warn("alpha = {:.3g} < 1, clamping epsilon to 1".format(alpha))
            return PhaseParams(epsilon=1.0, alpha=alpha)
        return PhaseParams.from_alpha(alpha)

    def to_json_dict(self):
        d = asdict(self)
        for key in ('parallelism', 'output_format', 'output_path'):
            del d[key]
        return d

    @classmethod
    def from_json_dict(cls, d):
        return cls(**d)


@dataclass
class TrialResult:
    trial: int
    stalled: bool
    T: int = None
    T1: int = None
    T2: int = None
    Tprime: int = None
    reachable: int = None
    edges: int = 0
    graph_seed: int = None
    protocol_seed: int = None
    pushes_to_uninformed: int = 0
    collisions: int = 0
    informed_counts: list = field(default_factory=list)
    phases: dict = None
    trace: dict = None

    def to_json_dict(self):
        d = asdict(self)
        if self.trace is None:
            del d['trace']
        return d

    @classmethod
    def from_json_dict(cls, d):
        return cls(**d)


def build_graph(config, graph_seed):
    if config.complete:
        return complete_graph(config.n)
    return generate_gnp(config.n, config.edge_probability(), graph_seed)

def graph_seed_for(config, trial):
    # In fixed-graph mode every trial shares the graph of trial 0
    return mix_seed(config.master_seed, 0 if config.fixed_graph else trial, 'graph')

def run_trial(config, trial, graph=None, params=None):
    """
    Runs trial number `trial` of the experiment. A given graph is used as is
    (fixed-graph mode); otherwise the trial samples its own.
    """
    params = params or config.phase_params()
    graph_seed = None if config.complete else graph_seed_for(config, trial)
    g = graph if graph is not None else build_graph(config, graph_seed)
    protocol_seed = mix_seed(config.master_seed, trial, 'protocol')
    trace = run_push(g, config.start, make_rng(protocol_seed))

    result = TrialResult(
        trial=trial,
        stalled=not trace.complete,
        edges=g.edge_count,
        graph_seed=graph_seed,
        protocol_seed=protocol_seed,
        pushes_to_uninformed=sum(r.pushes_to_uninformed for r in trace.rounds),
        collisions=sum(r.collisions for r in trace.rounds),
        informed_counts=trace.informed_counts(),
        trace=trace.to_json_dict() if config.record_traces else None)

    if trace.complete:
        phases = detect_phases(trace, params)
        result.T = phases.T
        result.T1 = phases.T1
        result.T2 = phases.T2
        result.Tprime = phases.Tprime
        result.phases = phases.to_json_dict()
    else:
        result.reachable = trace.outcome.reachable
    log.verbose("trial {}: {}".format(trial, trace.outcome))
    return result


# State of a pool worker, set once by the pool initializer
_worker = {}

def _init_worker(config, graph, params):
    _worker['config'] = config
    _worker['graph'] = graph
    _worker['params'] = params

def _trial_worker(trial):
    return run_trial(_worker['config'], trial, _worker['graph'], _worker['params'])


def summarize(values):
    """
    count, mean, std (population), min, max and quantiles of a sample.
    """
    a = np.asarray(values, dtype=float)
    if a.size == 0:
        return {'count': 0, 'mean': None, 'std': None, 'min': None, 'max': None, 'quantiles': {}}
    return {
        'count': int(a.size),
        'mean': float(a.mean()),
        'std': float(a.std()),
        'min': float(a.min()),
        'max': float(a.max()),
        'quantiles': {str(q): float(np.quantile(a, q)) for q in QUANTILES},
    }

def _regime_ratios(counts, n, params):
    early = []
    middle = []
    final = []
    violations = 0
    early_limit = max(n / 1000.0, 1.0)
    sqrt_ln_n = math.sqrt(math.log(n)) if n > 1 else 0.0
    eps = params.epsilon
    for t in range(len(counts) - 1):
        now = counts[t]
        nxt = counts[t + 1]
        if nxt > 2 * now:
            violations += 1
        if now <= early_limit:
            early.append(nxt / now)
        if eps * n <= now < (1.0 - eps) * n:
            middle.append(nxt / now)
        left = n - now
        if left > 0 and sqrt_ln_n <= left <= n / 100.0:
            final.append((n - nxt) / left)
    return early, middle, final, violations

def _final_phase_gains(counts, n, params):
    # Newly informed vertices N_t in the rounds starting at T2 + k, keyed by k
    t2 = detect_phases_from_counts(counts, n, params).T2
    return [(t - t2, counts[t + 1] - counts[t]) for t in range(t2, len(counts) - 1)]

def final_phase_median_mean(count_lists, n, params):
    """
    For every round T2 + k of the final phase, the mean, lower median and
    normalized gap |mean - median| / sqrt(mean) of the newly informed counts
    across the given broadcasts.
    """
    by_offset = {}
    for counts in count_lists:
        for k, gain in _final_phase_gains(counts, n, params):
            by_offset.setdefault(k, []).append(gain)

    rounds = {}
    for k in sorted(by_offset):
        mean, median, gap = median_mean_diagnostic(by_offset[k])
        rounds[str(k)] = {'samples': len(by_offset[k]), 'mean': mean, 'median': median, 'normalized_gap': gap}
    return rounds

def final_stay_bound(n, p, params):
    """
    The estimate of the probability that an uninformed vertex stays uninformed
    for one late round, or None where it is undefined.
    """
    if n < 2 or p is None or n * p * (1.0 + 3.0 * params.epsilon) <= 1.0:
        return None
    return finishing_stay_probability(n, p, params.epsilon)

def growth_diagnostics_from_counts(count_lists, n, params, p=None):
    early = []
    middle = []
    final = []
    violations = 0
    for counts in count_lists:
        e, m, f, v = _regime_ratios(counts, n, params)
        early.extend(e)
        middle.extend(m)
        final.extend(f)
        violations += v
    return {
        'early': summarize(early),
        'middle': summarize(middle),
        'final': summarize(final),
        'final_reference': math.exp(-1.0),
        'final_stay_bound': final_stay_bound(n, p, params),
        'median_mean': final_phase_median_mean(count_lists, n, params),
        'doubling_violations': violations,
    }

def growth_diagnostics(traces, params, p=None):
    """
    Ratios I_{t+1}/I_t while I_t <= max(n/1000, 1) (early) and while
    εn <= I_t < (1-ε)n (middle), and U_{t+1}/U_t while sqrt(ln n) <= U_t <= n/100
    (final, compared with 1/e). Stalled traces are skipped.
    """
    complete = [t for t in traces if t.complete]
    if not complete:
        return growth_diagnostics_from_counts([], 1, params, p)
    return growth_diagnostics_from_counts([t.informed_counts() for t in complete], complete[0].n, params, p)


@dataclass
class ExperimentReport:
    config: RunConfig
    trials: list
    stalled: int
    predicted_T: float
    relative_deviation: float
    deviation_band: float
    aggregates: dict
    collision_fraction: float
    growth: dict
    version: str = __version__

    @property
    def all_stalled(self):
        return self.stalled == len(self.trials)

    def completed(self):
        return [t for t in self.trials if not t.stalled]

    def to_json_dict(self):
        return {
            'version': self.version,
            'config': self.config.to_json_dict(),
            'fixed_graph': self.config.fixed_graph,
            'stalled': self.stalled,
            'predicted_T': self.predicted_T,
            'relative_deviation': self.relative_deviation,
            'deviation_band': self.deviation_band,
            'collision_fraction': self.collision_fraction,
            'aggregates': self.aggregates,
            'growth': self.growth,
            'trials': [t.to_json_dict() for t in self.trials],
        }

    @classmethod
    def from_json_dict(cls, d):
        return cls(
            config=RunConfig.from_json_dict(d['config']),
            trials=[TrialResult.from_json_dict(t) for t in d['trials']],
            stalled=d['stalled'],
            predicted_T=d['predicted_T'],
            relative_deviation=d['relative_deviation'],
            deviation_band=d['deviation_band'],
            aggregates=d['aggregates'],
            collision_fraction=d['collision_fraction'],
            growth=d['growth'],
            version=d['version'])


def build_report(config, results, params):
    done = [r for r in results if not r.stalled]
    n = config.n
    predicted = predicted_broadcast_time(n) if n >= 2 else 0.0

    aggregates = {
        'T': summarize([r.T for r in done]),
        'T1': summarize([r.T1 for r in done]),
        'T2_minus_T1': summarize([r.T2 - r.T1 for r in done]),
        'T_minus_T2': summarize([r.T - r.T2 for r in done]),
        'Tprime_minus_T2': summarize([r.Tprime - r.T2 for r in done]),
        'T_minus_Tprime': summarize([r.T - r.Tprime for r in done]),
    }
    mean_t = aggregates['T']['mean']
    deviation = None
    if mean_t is not None and predicted > 0.0:
        deviation = (mean_t - predicted) / predicted

    pushes = sum(r.pushes_to_uninformed for r in done)
    collisions = sum(r.collisions for r in done)

    return ExperimentReport(
        config=config,
        trials=list(results),
        stalled=len(results) - len(done),
        predicted_T=predicted,
        relative_deviation=deviation,
        deviation_band=deviation_band(n, params.alpha) if params.alpha is not None and n >= 2 else None,
        aggregates=aggregates,
        collision_fraction=collisions / pushes if pushes else 0.0,
        growth=growth_diagnostics_from_counts([r.informed_counts for r in done], n, params, config.edge_probability()))

def run_experiment(config):
    """
    Runs all trials of the experiment, in parallel if configured, and returns
    the report. The report is identical for every degree of parallelism.
    """
    config.validate()
    params = config.phase_params()

    graph = None
    if config.fixed_graph:
        graph = build_graph(config, graph_seed_for(config, 0))

    workers = min(config.parallelism, config.trials)
    log.info("running {} trials on n = {} ({}) with {} worker(s)".format(config.trials, config.n, config.density, workers))
    if workers <= 1:
        results = [run_trial(config, trial, graph, params) for trial in range(config.trials)]
    else:
        results = []
        chunksize = max(1, config.trials // (4 * workers))
        with multiprocessing.Pool(workers, initializer=_init_worker, initargs=(config, graph, params)) as pool:
            for r in pool.imap_unordered(_trial_worker, range(config.trials), chunksize=chunksize):
                results.append(r)
        # Arrival order depends on scheduling
        results.sort(key=lambda r: r.trial)

    report = build_report(config, results, params)
    if report.all_stalled:
        log.error("all {} trials stalled".format(config.trials))
    elif report.stalled:
        log.warn("{} of {} trials stalled and are excluded from the statistics".format(report.stalled, config.trials))
    return report


def report_to_json(report):
    return json.dumps(report.to_json_dict(), indent=2) + '\n'

def sidecar_path(path):
    return path + '.config.json'

def _write_csv(report, f):
    writer = csv.writer(f, lineterminator='\n')
    writer.writerow(CSV_HEADER)
    for r in report.trials:
        writer.writerow([r.trial,
                         '' if r.T is None else r.T,
                         '' if r.T1 is None else r.T1,
                         '' if r.T2 is None else r.T2,
                         '' if r.Tprime is None else r.Tprime,
                         int(r.stalled)])

def _write_config_json(report, f):
    json.dump({'version': report.version, 'config': report.config.to_json_dict()}, f, indent=2)
    f.write('\n')

def emit_report(report, fmt, path):
    """
    Writes the report as JSON (complete nested report) or CSV (one row per
    trial). A CSV written to a file gets a '<path>.config.json' sidecar with the
    configuration; path '-' writes to stdout, with the configuration of a CSV
    on stderr.
    """
    if fmt not in FORMATS:
        raise InvalidParameterException("unknown output format '{}', must be one of {}".format(fmt, ', '.join(FORMATS)))

    if path == '-':
        if fmt == 'json':
            sys.stdout.write(report_to_json(report))
        else:
            # stdout holds only the rows; the configuration echo goes to stderr
            _write_config_json(report, sys.stderr)
            _write_csv(report, sys.stdout)
        return

    try:
        if fmt == 'json':
            with open(path, 'w', newline='\n') as f:
                f.write(report_to_json(report))
        else:
            with open(path, 'w', newline='') as f:
                _write_csv(report, f)
            with open(sidecar_path(path), 'w', newline='\n') as f:
                _write_config_json(report, f)
    except OSError as e:
        raise OSError("cannot write report to '{}': {}".format(path, e.strerror or e)) from e
    log.verbose("wrote {} report to '{}'".format(fmt, path))

def load_report(path):
    with open(path, 'r') as f:
        return ExperimentReport.from_json_dict(json.load(f))

def replay_trace(report, trial):
    """
    Reconstructs the full trace of one trial from the seeds in the report.
    """
    r = report.trials[trial]
    config = report.config
    g = build_graph(config, r.graph_seed)
    return run_push(g, config.start, make_rng(r.protocol_seed))

def traces_of(report):
    """
    The recorded traces of a report run with record_traces.
    """
    return [Trace.from_json_dict(r.trace) for r in report.trials if r.trace is not None]
