"""PEP 517 backend: setuptools without executing the environment helper setup.py"""
from setuptools.build_meta import *  # noqa: F401,F403
from setuptools.build_meta import _BuildMetaBackend


class _Backend(_BuildMetaBackend):
    def run_setup(self, setup_script='setup.py'):
        # setup.py is an interactive environment helper, not a packaging script;
        # a missing script makes setuptools fall back to a plain setup() call
        super().run_setup(setup_script='__no_setup_script__.py')


_backend = _Backend()
get_requires_for_build_wheel = _backend.get_requires_for_build_wheel
get_requires_for_build_sdist = _backend.get_requires_for_build_sdist
get_requires_for_build_editable = _backend.get_requires_for_build_editable
prepare_metadata_for_build_wheel = _backend.prepare_metadata_for_build_wheel
prepare_metadata_for_build_editable = _backend.prepare_metadata_for_build_editable
build_wheel = _backend.build_wheel
build_sdist = _backend.build_sdist
build_editable = _backend.build_editable
