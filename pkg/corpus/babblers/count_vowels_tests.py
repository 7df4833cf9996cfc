import importlib.util
import sys


def load(path):
    spec = importlib.util.spec_from_file_location("candidate", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


mod = load(sys.argv[1])
assert mod.count_vowels('banana') == 3
assert mod.count_vowels('XYZ') == 0
assert mod.count_vowels('Aeiou') == 5
sys.exit(0)
