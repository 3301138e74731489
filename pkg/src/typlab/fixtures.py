"""Reference models shipped with the package.

Three chain laws cover the main regimes: a deterministic coupling
where every score collapses to type fluctuation, a binary symmetric
chain with genuinely noisy rows, and a geometric chain exercising the
countably infinite alphabet.  A plain geometric pmf rounds out the
set for single-coordinate checks.
"""

import json
from importlib import resources

from .errors import TyplabError
from .model import MarkovTriple, Pmf

CHAINS = ("deterministic_chain", "bsc_chain", "geometric_chain")
PMFS = ("geometric",)


def _resource(name):
    if name not in CHAINS + PMFS:
        raise TyplabError(
            "unknown fixture %r; shipped fixtures are %s"
            % (name, ", ".join(CHAINS + PMFS))
        )
    return resources.files("typlab.data").joinpath(name + ".json")


def fixture_path(name):
    """Filesystem path of a shipped fixture, by bare name."""
    with resources.as_file(_resource(name)) as path:
        return str(path)


def load_fixture(name):
    """A shipped chain model or pmf, built from its JSON file."""
    obj = json.loads(_resource(name).read_text(encoding="utf-8"))
    if name in PMFS:
        return Pmf.from_json(obj)
    return MarkovTriple.from_json(obj)
