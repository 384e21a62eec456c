"""Python bindings for the projlab workspace.

Thin loader around the compiled `_projlab` extension module.  Build the
extension first:

    cargo build -p projlab-python --release

then import this module with `python/` on the path (or from inside that
directory).  The loader picks the newest compiled library out of
`target/release` and `target/debug`; set PROJLAB_LIB to point at a specific
library file instead.
"""

import importlib.util
import os
import sys
from importlib.machinery import ExtensionFileLoader
from pathlib import Path

_LIB_NAMES = ("lib_projlab.so", "lib_projlab.dylib", "_projlab.so", "_projlab.pyd")


def _find_library():
    env = os.environ.get("PROJLAB_LIB")
    if env:
        path = Path(env)
        if not path.is_file():
            raise ImportError(f"PROJLAB_LIB={env} does not point at a file")
        return path
    root = Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / profile / name
        for profile in ("release", "debug")
        for name in _LIB_NAMES
    ]
    existing = [p for p in candidates if p.is_file()]
    if not existing:
        raise ImportError(
            "could not find the compiled _projlab extension; build it with "
            "`cargo build -p projlab-python --release` or set PROJLAB_LIB"
        )
    return max(existing, key=lambda p: p.stat().st_mtime)


def _load():
    if "_projlab" in sys.modules:
        return sys.modules["_projlab"]
    path = _find_library()
    loader = ExtensionFileLoader("_projlab", str(path))
    spec = importlib.util.spec_from_loader("_projlab", loader, origin=str(path))
    module = importlib.util.module_from_spec(spec)
    loader.exec_module(module)
    sys.modules["_projlab"] = module
    return module


_ext = _load()

globals().update(
    {name: value for name, value in vars(_ext).items() if not name.startswith("_")}
)
__version__ = _ext.__version__
__all__ = sorted(name for name in vars(_ext) if not name.startswith("_"))
