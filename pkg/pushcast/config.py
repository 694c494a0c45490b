import lark
import lark.exceptions
import sys

import pushcast.util as util
from pushcast import log
from pushcast.harness import RunConfig

currently_parsed_filenames = []

def def_at(tree):
    return (tree.meta, currently_parsed_filenames[-1]) if tree else None

_lark = None
def get_lark_parser():
    """
    Returns the lark parser for experiment files
    """
    global _lark # pylint: disable=global-statement
    if _lark is None:
        config_lark = util.read_resource('config.lark')
        _lark = lark.Lark(config_lark, propagate_positions=True, start='blck_root')

    return _lark

def die_redefinition(new_at, previous_at, name):
    log.print_error_at(new_at, "redefinition of {}".format(name))
    log.print_hint_at(previous_at, "previously defined here")
    sys.exit(1)

def apply_tree_nodes(nodes, callbacks, on_additional=None, ignore_additional=False):
    """
    For each node calls the callback matching its name.
    Raises an exception for unmatched nodes if ignore_additional is not set.
    """
    if isinstance(callbacks, list):
        callbacks = {c.__name__: c for c in callbacks}

    for n in nodes:
        if isinstance(n, lark.Tree):
            if n.data in callbacks:
                callbacks[n.data](n)
            elif n.data == "extra_semicolon":
                log.verbose("Extra semicolon at {}:{}:{}".format(currently_parsed_filenames[-1], n.meta.line, n.meta.column))
            elif on_additional:
                on_additional(n)
            elif not ignore_additional:
                log.die_print_error_at(def_at(n), "unprocessed rule '{}'; this is a bug that should be reported.".format(n.data))

def find_named_token_raw(tree, token_name):
    """
    Finds a token by subrule name in the children of the given tree and
    returns (value, location). Quoted strings are unquoted.
    """
    for c in tree.children:
        if isinstance(c, lark.Tree) and c.data == token_name:
            inner = c.children[0]
            if not isinstance(inner, lark.Tree) or inner.data not in ['string', 'string_quoted']:
                log.die_print_error_at(def_at(c), "subrule token '{}' has an invalid child; this is a bug that should be reported.".format(token_name))
            value = str(inner.children[0])
            if inner.data == 'string_quoted':
                value = util.decode_quotes(value)
            return value, def_at(inner)

    log.die_print_error_at(def_at(tree), "missing token '{}'".format(token_name))
    return None, None

class UniqueProperty:
    """
    A property that tracks if it has been changed, stores a default
    value and raises an error if it is assigned more than once.
    The raw string is converted by the given function, errors are
    reported at the value's location.
    """
    def __init__(self, name, default, convert=str):
        self.at = None
        self.name = name
        self.default = default
        self.convert = convert
        self._value = None

    @property
    def defined(self):
        return self._value is not None

    def parse(self, tree):
        if self.defined:
            die_redefinition(def_at(tree), self.at, self.name)

        tok, self.at = find_named_token_raw(tree, 'param')
        if self.convert is bool:
            self._value = util.parse_bool(self.at, tok)
            return
        try:
            self._value = self.convert(tok)
        except ValueError as e:
            log.die_print_error_at(self.at, "invalid value for {}: {}".format(self.name, str(e)))

    @property
    def value(self):
        return self.default if self._value is None else self._value

    @value.setter
    def value(self, v):
        self._value = v

    def __bool__(self):
        return bool(self.value)

    def __str__(self):
        return str(self.value)

class BlockNode:
    """
    A base class for blocks to help with tree parsing.
    """

    node_name = None
    first_definition = None # Will be overwritten

    def parse_context(self, ctxt):
        """
        Called to parse the related context
        """
        pass # pylint: disable=unnecessary-pass

    def parse_tree(self, tree):
        """
        Parses the given block tree node by calling parse_context on its context.
        """
        if self.first_definition is None:
            self.first_definition = def_at(tree)

        if tree.data != ('blck_' + self.node_name):
            log.die_print_error_at(def_at(tree), "{} cannot parse '{}'".format(self.__class__.__name__, tree.data))

        ctxt = None
        for c in tree.children:
            if isinstance(c, lark.Tree) and c.data == 'ctxt_' + self.node_name:
                if ctxt:
                    log.die_print_error_at(def_at(c), "'{}' must not have multiple children of type '{}'".format("blck_" + self.node_name, "ctxt_" + self.node_name))
                ctxt = c

        if not ctxt:
            log.die_print_error_at(def_at(tree), "'{}' must have exactly one child '{}'".format("blck_" + self.node_name, "ctxt_" + self.node_name))

        self.parse_context(ctxt)

def _seed(s):
    # Accepts decimal and 0x-prefixed seeds
    return int(s, 0)

class ConfigOutput(BlockNode):
    node_name = 'output'

    def __init__(self):
        self.format = UniqueProperty('format', default='json')
        self.path   = UniqueProperty('path',   default='-')

    def parse_context(self, ctxt):
        def stmt_output_format(tree):
            self.format.parse(tree)
            if self.format.value not in ['json', 'csv']:
                log.die_print_error_at(self.format.at, "invalid output format '{}', must be 'json' or 'csv'".format(self.format.value))
        def stmt_output_path(tree):
            self.path.parse(tree)

        apply_tree_nodes(ctxt.children, [
                stmt_output_format,
                stmt_output_path,
            ])

class ConfigExperiment(BlockNode):
    node_name = 'experiment'

    def __init__(self):
        self.output        = ConfigOutput()
        self.n             = UniqueProperty('n',             default=None, convert=int)
        self.p             = UniqueProperty('p',             default=None, convert=float)
        self.alpha         = UniqueProperty('alpha',         default=None, convert=float)
        self.complete      = UniqueProperty('complete',      default=False, convert=bool)
        self.trials        = UniqueProperty('trials',        default=1, convert=int)
        self.seed          = UniqueProperty('seed',          default=0, convert=_seed)
        self.start         = UniqueProperty('start',         default=0, convert=int)
        self.epsilon       = UniqueProperty('epsilon',       default=None, convert=float)
        self.parallelism   = UniqueProperty('parallelism',   default=1, convert=int)
        self.fixed_graph   = UniqueProperty('fixed_graph',   default=False, convert=bool)
        self.record_traces = UniqueProperty('record_traces', default=False, convert=bool)

    def density_properties(self):
        return [prop for prop in [self.p, self.alpha, self.complete] if prop.defined]

    def parse_context(self, ctxt):
        def blck_output(tree):
            self.output.parse_tree(tree)
        def stmt_experiment_n(tree):
            self.n.parse(tree)
        def stmt_experiment_p(tree):
            self.p.parse(tree)
        def stmt_experiment_alpha(tree):
            self.alpha.parse(tree)
        def stmt_experiment_complete(tree):
            self.complete.parse(tree)
        def stmt_experiment_trials(tree):
            self.trials.parse(tree)
        def stmt_experiment_seed(tree):
            self.seed.parse(tree)
        def stmt_experiment_start(tree):
            self.start.parse(tree)
        def stmt_experiment_epsilon(tree):
            self.epsilon.parse(tree)
        def stmt_experiment_parallelism(tree):
            self.parallelism.parse(tree)
        def stmt_experiment_fixed_graph(tree):
            self.fixed_graph.parse(tree)
        def stmt_experiment_record_traces(tree):
            self.record_traces.parse(tree)

        apply_tree_nodes(ctxt.children, [
                blck_output,
                stmt_experiment_n,
                stmt_experiment_p,
                stmt_experiment_alpha,
                stmt_experiment_complete,
                stmt_experiment_trials,
                stmt_experiment_seed,
                stmt_experiment_start,
                stmt_experiment_epsilon,
                stmt_experiment_parallelism,
                stmt_experiment_fixed_graph,
                stmt_experiment_record_traces,
            ])

        density = self.density_properties()
        if len(density) > 1:
            log.print_error_at(density[1].at, "'{}' conflicts with '{}', only one edge density may be given".format(density[1].name, density[0].name))
            log.print_hint_at(density[0].at, "density first given here")
            sys.exit(1)

class Config(BlockNode):
    node_name = 'root'

    def __init__(self):
        self.experiment = ConfigExperiment()

    def parse_context(self, ctxt):
        def blck_experiment(tree):
            if self.experiment.first_definition is not None:
                die_redefinition(def_at(tree), self.experiment.first_definition, "block 'experiment'")
            self.experiment.parse_tree(tree)

        apply_tree_nodes(ctxt.children, [
                blck_experiment,
            ])

def load_config_tree(config_file):
    """
    Loads the experiment file and returns the parsed tree.
    """
    larkparser = get_lark_parser()
    with open(config_file, 'r') as f:
        try:
            return larkparser.parse(f.read())
        except lark.exceptions.UnexpectedInput as e:
            log.print_message_with_file_location(config_file, log.msg_error(str(e).splitlines()[0]), e.line, (e.column, e.column))
            sys.exit(1)

def config_file_path(config_file):
    if config_file:
        return util.nullcontext_path(config_file)
    log.verbose("no experiment file given, using the internal configuration")
    return util.resource_path('internal.conf')

def load_config(config_file=None):
    """
    Loads and checks an experiment file. Without a file the internal
    configuration is used.
    """
    with config_file_path(config_file) as path:
        path = str(path)
        tree = load_config_tree(path)
        config = Config()

        currently_parsed_filenames.append(path)
        try:
            config.parse_tree(tree)
        finally:
            currently_parsed_filenames.pop()

        return config

def config_to_run_config(config, overrides=None):
    """
    Builds the RunConfig of a parsed experiment file. Entries of overrides
    that are not None replace the file's values; a density given in the
    overrides replaces the file's density.
    """
    e = config.experiment
    kwargs = {
        'n': e.n.value,
        'p': e.p.value,
        'alpha': e.alpha.value,
        'complete': e.complete.value,
        'trials': e.trials.value,
        'master_seed': e.seed.value,
        'start': e.start.value,
        'epsilon': e.epsilon.value,
        'parallelism': e.parallelism.value,
        'fixed_graph': e.fixed_graph.value,
        'record_traces': e.record_traces.value,
        'output_format': e.output.format.value,
        'output_path': e.output.path.value,
    }

    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    if any(k in overrides for k in ('p', 'alpha', 'complete')):
        kwargs['p'] = None
        kwargs['alpha'] = None
        kwargs['complete'] = False
    kwargs.update(overrides)

    if kwargs['n'] is None:
        log.die_print_error_at(e.first_definition, "the experiment does not set 'n'")
    return RunConfig(**kwargs)
