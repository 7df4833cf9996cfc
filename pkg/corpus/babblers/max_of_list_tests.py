import importlib.util
import sys


def load(path):
    spec = importlib.util.spec_from_file_location("candidate", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


mod = load(sys.argv[1])
assert mod.max_of_list([3, 1, 4, 1, 5]) == 5
assert mod.max_of_list([-7, -2, -9]) == -2
assert mod.max_of_list([42]) == 42
sys.exit(0)
