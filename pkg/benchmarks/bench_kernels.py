"""Benchmark the compiled scanning kernels against the pure-Python twins.

Usage: python3 benchmarks/bench_kernels.py [--size-kb N] [--repeat N]
"""

import argparse
import random
import statistics
import time

from refrank.kernels import pure

try:
    from refrank.kernels import _speedups
except ImportError:
    _speedups = None


def synthetic_text(size_kb, seed=7):
    rng = random.Random(seed)
    parts = []
    while sum(len(p) for p in parts) < size_kb * 1024:
        n = rng.randrange(10**6)
        choice = rng.randrange(5)
        if choice == 0:
            parts.append(f"Plain prose about item {n}. " * 6)
        elif choice == 1:
            parts.append(f"<ref>https://site{n % 89}.org/a/{n}</ref>\n")
        elif choice == 2:
            parts.append(
                f"<ref name=\"r{n % 41}\">{{{{Cite web|url=https://n{n % 31}.com/{n}"
                f"|title=T}}}}</ref>\n")
        elif choice == 3:
            parts.append(f"{{{{Infobox thing|param{n % 9}=value {n}}}}}\n")
        else:
            parts.append(f"See https://example{n % 13}.net/x/{n} for details. ")
    return "".join(parts)


def bench(fn, text, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn(text)
        times.append(time.perf_counter() - start)
    return min(times), statistics.median(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size-kb", type=int, default=256)
    parser.add_argument("--repeat", type=int, default=9)
    args = parser.parse_args()

    text = synthetic_text(args.size_kb)
    print(f"input: {len(text) / 1024:.0f} KB synthetic wikitext, "
          f"best/median of {args.repeat} runs\n")
    kernels = ["scan_ref_tags", "scan_bare_urls", "find_template_spans"]
    header = f"{'kernel':<22}{'pure best':>12}{'pure med':>12}"
    if _speedups is not None:
        header += f"{'ext best':>12}{'ext med':>12}{'speedup':>9}"
    print(header)
    for name in kernels:
        p_best, p_med = bench(getattr(pure, name), text, args.repeat)
        line = f"{name:<22}{p_best * 1e3:>10.2f}ms{p_med * 1e3:>10.2f}ms"
        if _speedups is not None:
            ext_fn = getattr(_speedups, name)
            assert ext_fn(text) == getattr(pure, name)(text), "backend mismatch"
            e_best, e_med = bench(ext_fn, text, args.repeat)
            line += (f"{e_best * 1e3:>10.2f}ms{e_med * 1e3:>10.2f}ms"
                     f"{p_best / e_best:>8.1f}x")
        print(line)
    if _speedups is None:
        print("\ncompiled extension not available; showing pure backend only")


if __name__ == "__main__":
    main()
