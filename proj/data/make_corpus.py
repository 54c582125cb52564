#!/usr/bin/env python3
"""Regenerates the bundled minilang corpus: host system `calc` and donors
`geomlib` and `strkit`.  Output is deterministic; run from any directory."""

import shutil
from pathlib import Path

ROOT = Path(__file__).resolve().parent


def write(path: Path, lines):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def host():
    base = ROOT / "calc"
    shutil.rmtree(base, ignore_errors=True)
    write(base / "project.manifest", ["name: calc", "srcdir: src", "testdir: test", "deps: std"])
    write(base / "src" / "main.mini", [
        "import ops.arith",
        "import ops.stats",
        "import std.io",
        "",
        "fn main() {",
        "  let xs = [3, 1, 4, 1, 5]",
        "  let total = arith.sum(xs)",
        "  let avg = stats.mean(xs)",
        "  io.print(total)",
        "  io.print(avg)",
        "}",
        "",
        "fn repl() {",
        "  let line = io.read()",
        "  while line != \"\" {",
        "    io.print(arith.eval(line))",
        "    line = io.read()",
        "  }",
        "}",
    ])
    write(base / "src" / "ops" / "arith.mini", [
        "fn add(a, b) {",
        "  return a + b",
        "}",
        "",
        "fn mul(a, b) {",
        "  return a * b",
        "}",
        "",
        "fn sum(xs) {",
        "  let acc = 0",
        "  for x in xs {",
        "    acc = add(acc, x)",
        "  }",
        "  return acc",
        "}",
        "",
        "fn eval(text) {",
        "  return 0",
        "}",
    ])
    write(base / "src" / "ops" / "stats.mini", [
        "import ops.arith",
        "",
        "fn mean(xs) {",
        "  if len(xs) == 0 {",
        "    return 0",
        "  }",
        "  return arith.sum(xs) / len(xs)",
        "}",
        "",
        "fn spread(xs) {",
        "  return max(xs) - min(xs)",
        "}",
    ])
    write(base / "src" / "util" / "log.mini", [
        "import std.io",
        "",
        "fn info(msg) {",
        "  io.print(\"info: \" + msg)",
        "}",
        "",
        "fn warn(msg) {",
        "  io.print(\"warn: \" + msg)",
        "}",
    ])
    write(base / "src" / "util" / "fmt.mini", [
        "fn pad(text, width) {",
        "  while len(text) < width {",
        "    text = \" \" + text",
        "  }",
        "  return text",
        "}",
    ])
    write(base / "test" / "arith_test.mini", [
        "import ops.arith",
        "",
        "@test",
        "fn adds() {",
        "  assert arith.add(2, 3) == 5",
        "}",
    ])
    write(base / ".features", [
        "# feature path: files mapped to it",
        "Logging: src/util/log.mini",
        "Formatting: src/util/fmt.mini",
    ])


def module(names, imports=()):
    lines = [f"import {m}" for m in imports]
    if lines:
        lines.append("")
    for i, name in enumerate(names):
        lines += [f"fn {name}(a, b) {{", f"  return a + b * {i + 1}", "}", ""]
    return lines[:-1]


def test_file(imports, tests, helpers=()):
    lines = [f"import {m}" for m in imports] + [""]
    for h in helpers:
        lines += [f"fn {h}(x) {{", "  return x", "}", ""]
    for name, body in tests:
        lines += ["@test", f"fn {name}() {{"] + [f"  {b}" for b in body] + ["}", ""]
    return lines[:-1]


def donor(name, deps, modules, suites):
    base = ROOT / name
    shutil.rmtree(base, ignore_errors=True)
    write(base / "project.manifest",
          [f"name: {name}", "srcdir: src", "testdir: test", f"deps: {', '.join(deps)}", "version: 1.0"])
    for path, (fns, imports) in modules.items():
        write(base / "src" / path, module(fns, imports))
    for path, lines in suites.items():
        write(base / "test" / path, lines)


def geomlib():
    modules = {
        "geom/vec.mini": (["vadd", "vsub", "vdot", "vscale"], ["mathx.core"]),
        "geom/mat.mini": (["mmul", "mt", "mdet"], ["geom.vec"]),
        "geom/shape.mini": (["area", "perimeter", "centroid"], ["geom.vec"]),
        "geom/bbox.mini": (["bmerge", "bhit"], []),
        "geom/poly.mini": (["pclip", "pwind", "phull"], ["geom.shape", "geom.mat"]),
    }
    suites = {}
    plan = [
        ("vec_test.mini", ["geom.vec"], ["vadd", "vsub", "vdot", "vscale"], "vec"),
        ("mat_test.mini", ["geom.mat"], ["mmul", "mt", "mdet"], "mat"),
        ("shape_test.mini", ["geom.shape"], ["area", "perimeter", "centroid"], "shape"),
        ("bbox_test.mini", ["geom.bbox"], ["bmerge", "bhit"], "bbox"),
        ("poly_test.mini", ["geom.poly", "std.io"], ["pclip", "pwind", "phull"], "poly"),
    ]
    for file, imports, fns, mod in plan:
        tests = []
        for k in range(6):
            fn = fns[k % len(fns)]
            tests.append((f"{mod}_{fn}_{k}", [f"let r = {mod}.{fn}({k}, {k + 1})", f"assert r >= {k}"]))
        # the last test leans on a file-local helper and is therefore not modular
        tests[-1] = (f"{mod}_local", [f"let r = fixture_{mod}({mod}.{fns[0]}(1, 2))", "assert r > 0"])
        suites[file] = test_file(imports, tests, helpers=[f"fixture_{mod}"])
    donor("geomlib", ["std", "mathx"], modules, suites)


def strkit():
    modules = {
        "str/core.mini": (["slen", "sjoin", "ssplit"], ["std.mem"]),
        "str/case.mini": (["upper", "lower", "title"], ["str.core"]),
        "str/search.mini": (["find", "rfind", "count"], ["str.core"]),
        "str/fmt.mini": (["pad", "trimw"], ["str.case"]),
    }
    suites = {}
    plan = [
        ("core_test.mini", ["str.core"], ["slen", "sjoin", "ssplit"], "core"),
        ("case_test.mini", ["str.case"], ["upper", "lower", "title"], "case"),
        ("search_test.mini", ["str.search"], ["find", "rfind", "count"], "search"),
        ("fmt_test.mini", ["str.fmt", "std.io"], ["pad", "trimw"], "fmt"),
    ]
    for file, imports, fns, mod in plan:
        tests = []
        for k in range(7):
            fn = fns[k % len(fns)]
            tests.append((f"{mod}_{fn}_{k}", [f"let r = {mod}.{fn}(\"ab\", {k})", "assert r != nil"]))
        tests[-1] = (f"{mod}_local", [f"assert sample_{mod}(1) == 1"])
        suites[file] = test_file(imports, tests, helpers=[f"sample_{mod}"])
    suites["support/words.mini"] = ["fn words() {", "  return [\"a\", \"b\"]", "}"]
    # depends on a module of the test source set, so it cannot be transplanted
    suites["words_test.mini"] = test_file(["support.words", "str.core"],
                                          [("splits_words", ["let w = words.words()", "assert len(w) == 2"])])
    donor("strkit", ["std"], modules, suites)


if __name__ == "__main__":
    host()
    geomlib()
    strkit()
