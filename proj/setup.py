import os
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        ext_path = Path(self.get_ext_fullpath(ext.name)).resolve()
        ext_dir = ext_path.parent
        build_dir = Path(self.build_temp).resolve()
        build_dir.mkdir(parents=True, exist_ok=True)

        try:
            import pybind11
            pybind11_dir = pybind11.get_cmake_dir()
        except ImportError:
            pybind11_dir = ""

        cfg_args = [
            "cmake",
            "-S", str(Path(__file__).parent.resolve()),
            "-B", str(build_dir),
            "-DCMAKE_BUILD_TYPE=Release",
            "-DOKB_BUILD_PYTHON=ON",
            f"-DPython3_EXECUTABLE={sys.executable}",
            f"-DCMAKE_LIBRARY_OUTPUT_DIRECTORY={ext_dir}",
        ]
        if pybind11_dir:
            cfg_args.append(f"-Dpybind11_DIR={pybind11_dir}")
        subprocess.run(cfg_args, check=True)
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_core",
             "--parallel", str(os.cpu_count() or 2)],
            check=True,
        )
        built = list(build_dir.glob("_core*.so")) + list(ext_dir.glob("_core*.so"))
        if not built:
            raise RuntimeError("cmake did not produce the _core extension")
        newest = max(built, key=lambda p: p.stat().st_mtime)
        ext_dir.mkdir(parents=True, exist_ok=True)
        if newest.resolve() != ext_path:
            ext_path.write_bytes(newest.read_bytes())


setup(
    ext_modules=[CMakeExtension("okbasis._core")],
    cmdclass={"build_ext": CMakeBuild},
)
