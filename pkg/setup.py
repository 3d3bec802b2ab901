"""Build glue: compile the Rust pairing extension with cargo.

The extension lives in native/ and is produced by `cargo build --release`.
setuptools-rust is intentionally not used so the only build prerequisites
are a Rust toolchain and setuptools itself.
"""

import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

ROOT = Path(__file__).resolve().parent
CRATE = ROOT / "native"
LIB_NAME = "libringauth_native.so" if sys.platform != "darwin" else "libringauth_native.dylib"


class CargoBuildExt(build_ext):
    def build_extension(self, ext):
        subprocess.run(
            ["cargo", "build", "--release", "--manifest-path", str(CRATE / "Cargo.toml")],
            check=True,
        )
        artifact = CRATE / "target" / "release" / LIB_NAME
        dest = Path(self.get_ext_fullpath(ext.name))
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(artifact, dest)
        # keep an in-tree copy so editable installs and PYTHONPATH=src both work
        inplace = ROOT / "src" / "ringauth" / "_pairing_native.so"
        shutil.copyfile(artifact, inplace)


setup(
    ext_modules=[Extension("ringauth._pairing_native", sources=[])],
    cmdclass={"build_ext": CargoBuildExt},
)
