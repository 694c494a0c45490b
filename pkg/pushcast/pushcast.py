import pushcast.bounds
import pushcast.config
import pushcast.graph
import pushcast.harness
import pushcast.oracle
import pushcast.typicality
from pushcast import __version__
from pushcast import log
from pushcast.graph import GraphFormatException
from pushcast.oracle import CapacityException
from pushcast.push import run_push
from pushcast.util import InvalidParameterException, NotBroadcastableException, make_rng, mix_seed

import argparse
import json
import math
import os
import sys

EXIT_STALLED = 2

def main_simulate(args):
    """
    Main function for the 'simulate' command.
    """
    if args.config_file:
        log.info("Loading experiment from '{}'".format(args.config_file))
    config = pushcast.config.load_config(args.config_file)
    run_config = pushcast.config.config_to_run_config(config, {
            'n': args.n,
            'p': args.p,
            'alpha': args.alpha,
            'complete': args.complete or None,
            'trials': args.trials,
            'master_seed': args.seed,
            'start': args.start,
            'epsilon': args.epsilon,
            'parallelism': args.parallelism,
            'fixed_graph': args.fixed_graph or None,
            'record_traces': args.record_traces or None,
            'output_format': args.format,
            'output_path': args.out,
        })

    report = pushcast.harness.run_experiment(run_config)
    pushcast.harness.emit_report(report, run_config.output_format, run_config.output_path)

    if report.completed():
        t = report.aggregates['T']
        log.info("mean T = {:.4f} (std {:.4f}), predicted {:.4f}".format(t['mean'], t['std'], report.predicted_T))
    if report.all_stalled:
        sys.exit(EXIT_STALLED)

def load_oracle_graph(args):
    if args.graph_file:
        return pushcast.graph.load_edge_list(args.graph_file)
    if args.n is None:
        raise InvalidParameterException("--topology needs --n")
    if args.topology == 'complete':
        return pushcast.graph.explicit_complete_graph(args.n)
    elif args.topology == 'star':
        if args.n < 2:
            raise InvalidParameterException("a star needs n >= 2, got {}".format(args.n))
        return pushcast.graph.star_graph(args.n - 1)
    return pushcast.graph.path_graph(args.n)

def main_oracle(args):
    """
    Main function for the 'oracle' command.
    """
    g = load_oracle_graph(args)
    dist = pushcast.oracle.exact_time_distribution(g, args.start, tail_cutoff=args.tail_cutoff)
    exact_mean = pushcast.oracle.exact_mean_time(g, args.start, exact=True) if args.exact else None

    if args.format == 'json':
        d = dist.to_json_dict()
        if exact_mean is not None:
            d['exact_mean'] = str(exact_mean)
        print(json.dumps(d, indent=2))
        return

    print("n = {}, start = {}".format(dist.n, dist.start))
    print("mean T = {:.12g}".format(dist.mean))
    if exact_mean is not None:
        print("exact mean T = {}".format(exact_mean))
    print("truncated at t = {}, tail mass = {:.3g}".format(dist.truncated_at, dist.tail_mass))
    for t, p in sorted(dist.probabilities.items()):
        if p >= args.tail_cutoff:
            print("{:5d} {:.12g}".format(t, p))

def main_typicality(args):
    """
    Main function for the 'typicality' command.
    """
    if args.p is not None:
        p = args.p
        alpha = p * args.n / math.log(args.n) if args.n > 1 else 1.0
    else:
        alpha = args.alpha
        p = pushcast.graph.gnp_probability(args.n, alpha)

    g = pushcast.graph.generate_gnp(args.n, p, mix_seed(args.seed, 0, 'graph'))
    if args.from_trace:
        trace = run_push(g, 0, make_rng(mix_seed(args.seed, 0, 'protocol')), snapshot=True)
        report = pushcast.typicality.audit_trace(g, trace, p, alpha, epsilon=args.epsilon)
    else:
        rng = make_rng(mix_seed(args.seed, 0, 'typicality'))
        report = pushcast.typicality.audit(g, p, alpha, args.samples, rng, epsilon=args.epsilon)

    if args.format == 'json':
        print(json.dumps(report.to_json_dict(), indent=2))
        return

    failed = report.failed()
    print("{} checks, {} failed".format(len(report.results), len(failed)))
    for r in failed:
        print("  property {} |S|={} ({}): {} violating, budget {}".format(
            r.property, r.S_size, r.size_class, r.violating.size, r.budget))

def _print_bound(value):
    print("{:.12g}".format(value))

def main_bounds_chernoff(args):
    _print_bound(pushcast.bounds.chernoff_bound(args.mean, args.x))
    if args.exact_n is not None:
        p = args.mean / args.exact_n
        if p > 1.0:
            raise InvalidParameterException("mean {} exceeds --exact-n {}".format(args.mean, args.exact_n))
        log.info("exact tail of Bin({}, {:.6g}):".format(args.exact_n, p))
        _print_bound(pushcast.bounds.binomial_tail(args.exact_n, p, args.x))

def main_bounds_azuma(args):
    _print_bound(pushcast.bounds.azuma_bound(args.sum_c_sq, args.x))

def main_bounds_talagrand(args):
    _print_bound(pushcast.bounds.talagrand_bound(args.median, args.x))

def check_file_exists(value):
    """
    Checks if the given exists
    """
    if not os.path.isfile(value):
        raise argparse.ArgumentTypeError("'{}' is not a file".format(value))
    return value

def positive_int(value):
    try:
        v = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("'{}' is not an integer".format(value)) from None
    if v < 1:
        raise argparse.ArgumentTypeError("'{}' must be at least 1".format(value))
    return v

def nonnegative_int(value):
    try:
        v = int(value, 0)
    except ValueError:
        raise argparse.ArgumentTypeError("'{}' is not an integer".format(value)) from None
    if v < 0:
        raise argparse.ArgumentTypeError("'{}' must not be negative".format(value))
    return v

def nonnegative_float(value):
    try:
        v = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError("'{}' is not a number".format(value)) from None
    if math.isnan(v) or v < 0.0:
        raise argparse.ArgumentTypeError("'{}' must not be negative".format(value))
    return v

class ArgumentParserError(Exception):
    pass

class ThrowingArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise ArgumentParserError(message)

def _add_density_options(parser, complete=True):
    density = parser.add_mutually_exclusive_group()
    density.add_argument('--p', dest='p', type=nonnegative_float,
            help="Edge probability of G(n, p). Values above 1 are clamped to 1.")
    density.add_argument('--alpha', dest='alpha', type=nonnegative_float,
            help="Density factor alpha, sets p = alpha * ln(n) / n.")
    if complete:
        density.add_argument('--complete', dest='complete', action='store_true',
                help="Use the complete graph K_n instead of a random graph.")
    return density

def build_parser():
    parser = ThrowingArgumentParser(description="Pushcast simulates the randomized push broadcast protocol on random graphs and checks the results against exact and analytic predictions. If no mode is given, 'pushcast --help' will be executed.")
    subparsers = parser.add_subparsers(title="commands",
            description="Use 'pushcast command --help' to view the help for any command.",
            metavar='command')

    # General options
    parser.add_argument('--no-color', dest='use_color', action='store_false',
            help="Disables coloring in normal output.")
    parser.add_argument('--version', action='version',
            version='%(prog)s {version}'.format(version=__version__))

    # Output options
    output_options = parser.add_mutually_exclusive_group()
    output_options.add_argument('-q', '--quiet', dest='quiet', action='store_true',
            help="Disables any additional output except for errors and results.")
    output_options.add_argument('-v', '--verbose', dest='verbose', action='store_true',
            help="Enables verbose output.")

    # Simulate
    parser_simulate = subparsers.add_parser('simulate', help="Runs a multi-trial broadcast experiment and writes the report. Options given here override the experiment file.")
    parser_simulate.add_argument('-C', '--config', dest='config_file', default=None, type=check_file_exists,
            help="The experiment file to use. Default is an internal fallback experiment.")
    parser_simulate.add_argument('--n', dest='n', type=positive_int,
            help="Number of vertices.")
    _add_density_options(parser_simulate)
    parser_simulate.add_argument('--trials', dest='trials', type=positive_int,
            help="Number of independent trials.")
    parser_simulate.add_argument('--seed', dest='seed', type=nonnegative_int,
            help="Master seed (64-bit unsigned). Every trial derives its own streams from it.")
    parser_simulate.add_argument('--start', dest='start', type=nonnegative_int,
            help="The vertex that initially holds the message (default: 0).")
    parser_simulate.add_argument('--epsilon', dest='epsilon', type=float,
            help="Phase threshold epsilon. The default is alpha^(-1/2).")
    parser_simulate.add_argument('-j', '--parallelism', dest='parallelism', type=positive_int,
            help="Number of worker processes. Does not change the report.")
    parser_simulate.add_argument('--fixed-graph', dest='fixed_graph', action='store_true',
            help="Samples a single graph and reuses it for every trial.")
    parser_simulate.add_argument('--record-traces', dest='record_traces', action='store_true',
            help="Includes the full per-round trace of every trial in the report.")
    parser_simulate.add_argument('--format', dest='format', choices=['json', 'csv'],
            help="Report format (default: json).")
    parser_simulate.add_argument('-o', '--out', dest='out',
            help="Writes the report to the given file. Use - for stdout (default).")
    parser_simulate.set_defaults(func=main_simulate)

    # Oracle
    parser_oracle = subparsers.add_parser('oracle', help="Computes the exact distribution of the broadcast time on a small graph.")
    graph_source = parser_oracle.add_mutually_exclusive_group(required=True)
    graph_source.add_argument('--graph-file', dest='graph_file', type=check_file_exists,
            help="Edge-list file of the graph.")
    graph_source.add_argument('--topology', dest='topology', choices=['complete', 'star', 'path'],
            help="A fixed topology on --n vertices (the star has center 0).")
    parser_oracle.add_argument('--n', dest='n', type=positive_int,
            help="Number of vertices of the topology.")
    parser_oracle.add_argument('--start', dest='start', type=nonnegative_int, default=0,
            help="The vertex that initially holds the message (default: 0).")
    parser_oracle.add_argument('--tail-cutoff', dest='tail_cutoff', type=float, default=pushcast.oracle.DEFAULT_TAIL_CUTOFF,
            help="Stops once less probability mass than this is left (default: 1e-12).")
    parser_oracle.add_argument('--exact', dest='exact', action='store_true',
            help="Additionally computes the mean as an exact fraction.")
    parser_oracle.add_argument('--format', dest='format', choices=['text', 'json'], default='text',
            help="Output format (default: text).")
    parser_oracle.set_defaults(func=main_oracle)

    # Typicality
    parser_typicality = subparsers.add_parser('typicality', help="Samples a random graph and audits the typicality properties on random vertex sets.")
    parser_typicality.add_argument('--n', dest='n', type=positive_int, required=True,
            help="Number of vertices.")
    density = _add_density_options(parser_typicality, complete=False)
    density.required = True
    parser_typicality.add_argument('--seed', dest='seed', type=nonnegative_int, default=0,
            help="Seed of the graph and of the sampled sets.")
    parser_typicality.add_argument('--samples', dest='samples', type=positive_int, default=100,
            help="Random sets per size class (default: 100).")
    parser_typicality.add_argument('--epsilon', dest='epsilon', type=float,
            help="The epsilon of the properties. The default is alpha^(-1/2).")
    parser_typicality.add_argument('--from-trace', dest='from_trace', action='store_true',
            help="Audits the informed sets of one broadcast from vertex 0 instead of random sets.")
    parser_typicality.add_argument('--format', dest='format', choices=['text', 'json'], default='text',
            help="Output format (default: text).")
    parser_typicality.set_defaults(func=main_typicality)

    # Bounds
    parser_bounds = subparsers.add_parser('bounds', help="Evaluates a tail bound.")
    bound_kinds = parser_bounds.add_subparsers(title="bounds", metavar='bound')

    parser_chernoff = bound_kinds.add_parser('chernoff', help="2 exp(-x^2 / (2 (mean + x/3)))")
    parser_chernoff.add_argument('--mean', dest='mean', type=nonnegative_float, required=True)
    parser_chernoff.add_argument('--x', dest='x', type=nonnegative_float, required=True)
    parser_chernoff.add_argument('--exact-n', dest='exact_n', type=positive_int,
            help="Also prints the exact two-sided tail of Bin(N, mean/N).")
    parser_chernoff.set_defaults(func=main_bounds_chernoff)

    parser_azuma = bound_kinds.add_parser('azuma', help="2 exp(-x^2 / (2 sum c_i^2))")
    parser_azuma.add_argument('--sum-c-sq', dest='sum_c_sq', type=float, required=True)
    parser_azuma.add_argument('--x', dest='x', type=nonnegative_float, required=True)
    parser_azuma.set_defaults(func=main_bounds_azuma)

    parser_talagrand = bound_kinds.add_parser('talagrand', help="4 exp(-x^2 / (4 ceil(median + x)))")
    parser_talagrand.add_argument('--median', dest='median', type=nonnegative_float, required=True)
    parser_talagrand.add_argument('--x', dest='x', type=nonnegative_float, required=True)
    parser_talagrand.set_defaults(func=main_bounds_talagrand)

    return parser

def pushcast_main(argv=None):
    """
    Parses options and dispatches control to the correct subcommand function
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ArgumentParserError as e:
        log.die(str(e))

    # Set logging options
    log.set_verbose(args.verbose)
    log.set_quiet(args.quiet)
    log.set_use_color(args.use_color)

    if 'func' not in args:
        # Fallback to --help.
        parser.print_help()
    else:
        args.func(args)

def main(argv=None):
    try:
        pushcast_main(argv)
    except NotBroadcastableException as e:
        log.die(str(e), code=EXIT_STALLED)
    except (InvalidParameterException, GraphFormatException, CapacityException) as e:
        log.die(str(e))
    except OSError as e:
        log.die(str(e))
    except Exception: # pylint: disable=broad-except
        import traceback
        traceback.print_exc()
        log.die("Aborted because of previous errors")

if __name__ == '__main__':
    main()
