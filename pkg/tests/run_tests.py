# Test suite runner and utilities

import argparse
import os
import sys

import pytest

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

TEST_DIR = os.path.dirname(os.path.abspath(__file__))

SUITES = {
    'core': ['test_linalg.py', 'test_states.py', 'test_channels.py', 'test_info.py'],
    'recovery': ['test_correlators.py', 'test_markov.py', 'test_purification.py', 'test_stability.py'],
    'dynamics': ['test_lindblad.py'],
    'models': ['test_models.py'],
    'harness': ['test_config.py', 'test_serialization.py', 'test_scans.py',
                'test_verification.py', 'test_cli.py'],
}


def run_test_suite(modules=None, failfast=False, verbose=True, keyword=None):
    """Run the test suite (or a subset of modules) through pytest"""
    targets = [os.path.join(TEST_DIR, m) for m in modules] if modules else [TEST_DIR]
    args = targets + (['-v'] if verbose else ['-q'])
    if failfast:
        args.append('-x')
    if keyword:
        args += ['-k', keyword]
    print(f"locstab test suite: {', '.join(modules) if modules else 'all modules'}")
    print("=" * 50)
    return pytest.main(args)


if __name__ == '__main__':
    parser = argparse.ArgumentParser(description='locstab Test Runner')
    parser.add_argument('--suite', choices=sorted(SUITES), help='Run one group of test modules')
    parser.add_argument('--modules', nargs='+', help='Run specific test modules')
    parser.add_argument('-k', dest='keyword', help='Only tests matching this expression')
    parser.add_argument('--failfast', action='store_true', help='Stop on first failure')
    parser.add_argument('--quiet', action='store_true', help='Less output')

    args = parser.parse_args()
    modules = args.modules or (SUITES[args.suite] if args.suite else None)
    sys.exit(run_test_suite(modules, failfast=args.failfast, verbose=not args.quiet, keyword=args.keyword))
