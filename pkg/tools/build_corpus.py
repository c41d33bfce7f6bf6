"""Regenerate src/chainhodge/data/*.json from the corpus constructors."""

from pathlib import Path

import numpy as np

from chainhodge import corpus
from chainhodge.complex_model import homology
from chainhodge.fileformat import ComplexFile, dumps

OUT = Path(__file__).resolve().parent.parent / "src" / "chainhodge" / "data"
RANDOM_SEEDS = (4, 35)


def first_generator(c, d):
    h = homology(c, d - 1)
    if not h.betti:
        return {}
    col = h.free_generators.column(0)
    return {n: v for n, v in zip(c.cells(d - 1), col) if v}


def build():
    docs = {}
    docs["two_vertex_edge"] = ComplexFile(corpus.two_vertex_edge(), 1,
                                          cycles={"v0": {"v0": 1}})
    docs["theta_graph"] = ComplexFile(corpus.theta_graph(), 1, cycles={"v0": {"v0": 1}})
    docs["circle"] = ComplexFile(corpus.circle(), 1, cycles={"v": {"v": 1}})
    k4 = corpus.complete_graph(4)
    barriers = dict(zip(k4.cells(1), (0.0, 0.5, 1.0, -0.5, 0.25, 2.0)))
    docs["k4"] = ComplexFile(k4, 1, beta=2.0, w_map=barriers, cycles={"v0": {"v0": 1}})
    t = corpus.torus_2x2()
    docs["torus"] = ComplexFile(t, 2, cycles={"meridian": {"y00": 1, "y01": 1}})
    docs["moore_mod2"] = ComplexFile(corpus.moore_mod2(), 1, cycles={"a": {"a": 1}})
    for seed in RANDOM_SEEDS:
        c = corpus.random_complex(np.random.default_rng(seed), top=3, max_cells=6)
        docs[f"random3_seed{seed}"] = ComplexFile(c, 3, cycles={"gen0": first_generator(c, 3)})
    for name, cf in docs.items():
        cf.name = name
        (OUT / f"{name}.json").write_text(dumps(cf), encoding="utf-8")
    return sorted(docs)


if __name__ == "__main__":
    print("\n".join(build()))
