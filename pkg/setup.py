#!/usr/bin/env python3
"""
Environment helper for delaysim: installs the numeric stack, prepares .env
and the output directory, then validates the shipped run configs.
"""

import os
import shutil
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent
MIN_PYTHON = (3, 9)


def banner():
    print("""
    ==============================================
      delaysim environment setup
      parabolic equations with delayed feedback
    ==============================================
    """)


def require_python():
    if sys.version_info < MIN_PYTHON:
        wanted = '.'.join(str(part) for part in MIN_PYTHON)
        print(f"❌ delaysim needs Python {wanted}+, found {sys.version.split()[0]}")
        sys.exit(1)
    print(f"✅ Python {sys.version.split()[0]}")


def install_numeric_stack(skip: bool = False):
    """pip-install requirements.txt unless --no-install was given"""
    if skip:
        print("⏭️  Skipping dependency installation")
        return
    command = [sys.executable, '-m', 'pip', 'install', '-r', str(ROOT / 'requirements.txt')]
    print(f"📦 {' '.join(command)}")
    if subprocess.run(command).returncode != 0:
        print("❌ pip could not install requirements.txt")
        sys.exit(1)


def report_versions():
    """numpy and scipy must import; their versions go into bug reports"""
    try:
        import numpy
        import scipy
    except ImportError as e:
        print(f"❌ Numeric stack unavailable: {e}")
        sys.exit(1)
    print(f"✅ numpy {numpy.__version__}, scipy {scipy.__version__}")


def prepare_environment():
    target = ROOT / '.env'
    template = ROOT / '.env.example'
    if target.exists():
        print("✅ Keeping existing .env")
    elif template.exists():
        shutil.copy(template, target)
        print("✅ Wrote .env from .env.example")

    out_dir = ROOT / os.getenv('DELAYSIM_OUTPUT_DIR', 'output')
    out_dir.mkdir(parents=True, exist_ok=True)
    print(f"✅ Reports go to {out_dir}")


def validate_shipped_configs() -> int:
    """Parse every config under config/runs; returns the number of failures"""
    sys.path.insert(0, str(ROOT))
    from config.run_config import load_run_config
    from delaysim.utils.errors import InputError

    failures = 0
    for path in sorted((ROOT / 'config' / 'runs').glob('*.json')):
        try:
            load_run_config(path).build_preset()
            print(f"   ✅ {path.name}")
        except InputError as e:
            failures += 1
            print(f"   ❌ {e}")
    return failures


def next_steps():
    print("""
    🎉 Ready.

      python run_simulator.py --config config/runs/linear_benchmark.json --subcommand solve
      python run_simulator.py --config config/runs/sdd_benchmark.json --subcommand verify
      pytest

    Run configs are described in config/run_config.schema.json,
    environment variables in .env.example.
    """)


def main():
    banner()
    require_python()
    install_numeric_stack(skip='--no-install' in sys.argv[1:])
    report_versions()
    prepare_environment()

    print("🔍 Validating shipped run configs...")
    if validate_shipped_configs():
        print("❌ Some run configs are invalid")
        sys.exit(1)
    next_steps()


if __name__ == '__main__':
    try:
        main()
    except KeyboardInterrupt:
        print("\n❌ Setup interrupted")
        sys.exit(1)
