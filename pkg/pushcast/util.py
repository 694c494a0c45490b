import codecs
import contextlib
import hashlib
import re
import importlib.resources as pkg_resources
from pathlib import Path

import numpy as np

import pushcast.contrib
from pushcast import log


class InvalidParameterException(ValueError):
    pass

class NotBroadcastableException(Exception):
    pass


ESCAPE_SEQUENCE_RE = re.compile(r'''
    ( \\U........   # 8-digit hex escapes
    | \\u....       # 4-digit hex escapes
    | \\x..         # 2-digit hex escapes
    | \\[0-7]{1,3}  # Octal escapes
    | \\N\{[^}]+\}  # Unicode characters by name
    | \\[\\'"nrv]   # Single-character escapes
    )''', re.UNICODE | re.VERBOSE)

def decode_escapes(s):
    def decode_match(match):
        return codecs.decode(match.group(0), 'unicode-escape')

    return ESCAPE_SEQUENCE_RE.sub(decode_match, s)

def decode_quotes(s):
    """
    Strips leading and trailing quotes from the string, if any.
    Also decodes escapes inside the string.
    """
    return decode_escapes(s[1:-1]) if len(s) >= 2 and s[0] == s[-1] and s[0] in ['"', "'"] else s

def parse_bool(at, s):
    if s in ['true', '1', 'yes', 'y', 'on']:
        return True
    elif s in ['false', '0', 'no', 'n', 'off']:
        return False
    else:
        log.die_print_error_at(at, "invalid value for boolean")

def read_resource(name, pkg=pushcast.contrib):
    return pkg_resources.files(pkg).joinpath(name).read_text()

def resource_path(name, pkg=pushcast.contrib):
    return pkg_resources.as_file(pkg_resources.files(pkg).joinpath(name))

def nullcontext_path(path):
    """
    Wraps a plain path like resource_path wraps a resource.
    """
    return contextlib.nullcontext(Path(path))


MASK64 = (1 << 64) - 1

def splitmix64(x):
    """
    The splitmix64 finalizer (Steele, Lea, Flood 2014). Maps a 64-bit integer
    to a 64-bit integer with full avalanche.
    """
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)

def purpose_tag(name):
    """
    Stable 64-bit tag for a purpose name ('graph', 'protocol', ...).
    Python's hash() is salted per process, so a digest is used instead.
    """
    return int.from_bytes(hashlib.sha256(name.encode('utf-8')).digest()[:8], 'little')

def mix_seed(master_seed, index, purpose):
    """
    Derives the seed of stream (master_seed, index, purpose). The result only
    depends on its arguments, never on worker scheduling.
    """
    check_seed(master_seed)
    h = splitmix64(master_seed & MASK64)
    h = splitmix64(h ^ (index & MASK64))
    return splitmix64(h ^ purpose_tag(purpose))

def check_seed(seed):
    if not isinstance(seed, (int, np.integer)) or seed < 0 or seed > MASK64:
        raise InvalidParameterException("seed must be a 64-bit unsigned integer, got {!r}".format(seed))
    return int(seed)

def make_rng(seed):
    """
    Returns the random stream used everywhere in pushcast for the given seed.
    """
    return np.random.Generator(np.random.PCG64(check_seed(seed)))
