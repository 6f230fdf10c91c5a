import os
import subprocess
import sys

import pytest

from rsspline import kernels
from rsspline import hash_corrector as hcm
from rsspline.gen import generate
from rsspline.keyspace import validate_dataset
from rsspline.rss import RssConfig, RssIndex

needs_both = pytest.mark.skipif(len(kernels.available()) < 2, reason="compiled backend not built")


def test_python_backend_always_available():
    assert "python" in kernels.available()
    assert kernels.get("python").NAME == "python"
    assert kernels.get(None) is kernels.DEFAULT
    with pytest.raises(ValueError):
        kernels.get("fortran")


@pytest.mark.parametrize("forced", ["python"] + (["cython"] if "cython" in kernels.available() else []))
def test_environment_override(forced):
    code = "from rsspline import kernels; print(kernels.DEFAULT.NAME)"
    env = dict(os.environ, RSSPLINE_BACKEND=forced)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    assert out.stdout.strip() == forced


@needs_both
@pytest.mark.parametrize("kind", ["uniform", "prefix-heavy", "natural-ish"])
def test_full_agreement(kind):
    keys = generate(kind, 5000, seed=17, prefix_len=48)
    ds = validate_dataset(keys)
    qs = keys[::3] + [k + b"." for k in keys[::7]] + [k[:5] for k in keys[::13]]
    results = []
    for name in ("python", "cython"):
        ix = RssIndex.build(ds, RssConfig(k=8, error=31), backend=name)
        assert ix.backend == name
        hc = hcm.build_hc(ix)
        results.append((
            ix.stats(), ix.memory_bytes(),
            [ix.predict_rank(q)[1] for q in qs],
            ix.lookup_eq_many(qs), ix.lower_bound_many(qs),
            list(hc.slots), hcm.lookup_eq_hc_many(ix, hc, qs),
        ))
    assert results[0] == results[1]


def test_falls_back_when_extension_missing():
    code = """
import sys
class Block:
    def find_spec(self, name, path=None, target=None):
        if name == "rsspline._speedups":
            raise ImportError("blocked")
sys.meta_path.insert(0, Block())
from rsspline import kernels
from rsspline.keyspace import validate_dataset
from rsspline.rss import RssIndex
assert kernels.available() == ["python"]
ix = RssIndex.build(validate_dataset([b"a", b"b", b"c"]))
print(kernels.DEFAULT.NAME, ix.lookup_eq(b"b"))
"""
    env = {k: v for k, v in os.environ.items() if k != "RSSPLINE_BACKEND"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    assert out.stdout.split() == ["python", "1"]
