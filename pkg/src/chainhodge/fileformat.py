"""JSON document format for complexes, scalar blocks and named cycles.

See docs/file_format.md for the grammar.  Integer coefficients are decimal
strings (plain JSON integers are accepted on input); reals are decimal
strings parsed with ``float``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Mapping

from .complex_model import ChainComplex, ScalarStructure
from .errors import ChainHodgeError, ParseError
from .exact_linalg import IntMatrix

FORMAT_TAG = "chainhodge-complex/1"


@dataclass
class ComplexFile:
    """A parsed document.

    ``e_map`` lives on (d-1)-cells and ``w_map`` on d-cells for the document
    degree d; ``energies`` holds any further degrees.  With ``legacy_naming``
    the two named maps trade places (W on (d-1)-cells, E on d-cells).
    """

    complex: ChainComplex
    degree: int
    beta: float = 1.0
    e_map: dict[str, float] | None = None
    w_map: dict[str, float] | None = None
    energies: dict[int, dict[str, float]] = field(default_factory=dict)
    cycles: dict[str, dict[str, int]] = field(default_factory=dict)
    name: str = ""

    def scalars(self, legacy_naming: bool = False, beta: float | None = None,
                overrides: Mapping[int, Mapping[str, float]] | None = None) -> ScalarStructure:
        d, c = self.degree, self.complex
        energies = {k: dict(v) for k, v in self.energies.items()}
        low, high = (self.w_map, self.e_map) if legacy_naming else (self.e_map, self.w_map)
        for k, m in ((d - 1, low), (d, high)):
            if m is not None:
                energies[k] = dict(m)
            else:
                energies.setdefault(k, {n: 0.0 for n in c.cells(k)})
        for k, m in (overrides or {}).items():
            energies.setdefault(k, {}).update(m)
        return ScalarStructure(self.beta if beta is None else beta, energies)

    def cycle(self, name: str) -> tuple[int, ...]:
        if name not in self.cycles:
            raise ParseError(f"unknown cycle {name!r}; known: {sorted(self.cycles)}")
        return self.complex.chain(self.degree - 1, self.cycles[name])


def _int(x, where) -> int:
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise ParseError(f"{where}: coefficient must be a decimal string, got {x!r}")
    try:
        return int(x)
    except ValueError:
        raise ParseError(f"{where}: bad integer {x!r}") from None


def _real(x, where) -> float:
    if isinstance(x, bool):
        raise ParseError(f"{where}: bad number {x!r}")
    try:
        return float(x)
    except (TypeError, ValueError):
        raise ParseError(f"{where}: bad number {x!r}") from None


def _name_map(raw, names, where, conv):
    if not isinstance(raw, dict):
        raise ParseError(f"{where}: expected an object")
    out = {}
    for k, v in raw.items():
        if k not in names:
            raise ParseError(f"{where}: unknown cell {k!r}")
        out[k] = conv(v, f"{where}[{k}]")
    return out


def from_document(doc: Mapping[str, Any]) -> ComplexFile:
    if not isinstance(doc, Mapping):
        raise ParseError("document must be a JSON object")
    cells = doc.get("cells")
    if not isinstance(cells, list) or not all(isinstance(c, list) for c in cells) or not cells:
        raise ParseError("'cells' must be a non-empty list of name lists")
    cells = [[str(n) for n in names] for names in cells]
    index = [{n: i for i, n in enumerate(names)} for names in cells]
    for k, names in enumerate(cells):
        if len(index[k]) != len(names):
            raise ParseError(f"duplicate cell name in degree {k}")
    top = len(cells) - 1
    bd = {}
    for key, entries in (doc.get("boundary") or {}).items():
        k = _int(key, "boundary degree")
        if not 1 <= k <= top:
            raise ParseError(f"boundary degree {k} outside 1..{top}")
        rows = [[0] * len(cells[k]) for _ in cells[k - 1]]
        for item in entries:
            if not (isinstance(item, list) and len(item) == 2 and isinstance(item[1], list)):
                raise ParseError(f"boundary[{k}]: expected [cell, [[face, coeff], ...]]")
            cell, faces = item
            if cell not in index[k]:
                raise ParseError(f"boundary[{k}]: unknown {k}-cell {cell!r}")
            j = index[k][cell]
            for face in faces:
                if not (isinstance(face, list) and len(face) == 2):
                    raise ParseError(f"boundary[{k}][{cell}]: expected [face, coeff]")
                f, coeff = face
                if f not in index[k - 1]:
                    raise ParseError(f"boundary[{k}][{cell}]: unknown {k - 1}-cell {f!r}")
                i = index[k - 1][f]
                if rows[i][j]:
                    raise ParseError(f"boundary[{k}][{cell}]: face {f!r} listed twice")
                rows[i][j] = _int(coeff, f"boundary[{k}][{cell}][{f}]")
        bd[k] = IntMatrix(rows, len(cells[k]))
    try:
        c = ChainComplex(cells, bd)
    except ChainHodgeError as exc:
        raise ParseError(f"not a chain complex: {exc}") from exc
    d = _int(doc.get("degree", top), "degree")
    if not 1 <= d <= top:
        raise ParseError(f"degree {d} outside 1..{top}")
    sc = doc.get("scalars") or {}
    e_map = w_map = None
    if "E" in sc:
        e_map = _name_map(sc["E"], index[d - 1].keys() | index[d].keys(), "scalars.E", _real)
    if "W" in sc:
        w_map = _name_map(sc["W"], index[d - 1].keys() | index[d].keys(), "scalars.W", _real)
    energies = {}
    for key, m in (sc.get("energies") or {}).items():
        k = _int(key, "energies degree")
        if not 0 <= k <= top:
            raise ParseError(f"energies degree {k} outside 0..{top}")
        energies[k] = _name_map(m, index[k], f"energies[{k}]", _real)
    cycles = {}
    for name, vec in (doc.get("cycles") or {}).items():
        cycles[str(name)] = _name_map(vec, index[d - 1], f"cycles[{name}]", _int)
    return ComplexFile(c, d, _real(sc.get("beta", "1"), "scalars.beta"), e_map, w_map,
                       energies, cycles, str(doc.get("name", "")))


def to_document(cf: ComplexFile) -> dict:
    c = cf.complex
    boundary = {}
    for k in range(1, c.dim + 1):
        m = c.boundary(k)
        lo = c.cells(k - 1)
        boundary[str(k)] = [
            [cell, [[lo[i], str(m[i, j])] for i in range(m.nrows) if m[i, j]]]
            for j, cell in enumerate(c.cells(k))
        ]
    doc: dict[str, Any] = {"format": FORMAT_TAG}
    if cf.name:
        doc["name"] = cf.name
    doc["cells"] = [list(n) for n in c.cell_names]
    doc["boundary"] = boundary
    doc["degree"] = cf.degree
    sc: dict[str, Any] = {"beta": repr(float(cf.beta))}
    if cf.e_map is not None:
        sc["E"] = {k: repr(v) for k, v in cf.e_map.items()}
    if cf.w_map is not None:
        sc["W"] = {k: repr(v) for k, v in cf.w_map.items()}
    if cf.energies:
        sc["energies"] = {str(k): {n: repr(v) for n, v in m.items()}
                          for k, m in sorted(cf.energies.items())}
    doc["scalars"] = sc
    if cf.cycles:
        doc["cycles"] = {name: {n: str(v) for n, v in vec.items()} for name, vec in cf.cycles.items()}
    return doc


def loads(text: str) -> ComplexFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return from_document(doc)


def dumps(cf: ComplexFile) -> str:
    return json.dumps(to_document(cf), indent=2) + "\n"


def load(path) -> ComplexFile:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def bundled_names() -> list[str]:
    root = resources.files("chainhodge") / "data"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_bundled(name: str) -> ComplexFile:
    path = resources.files("chainhodge") / "data" / f"{name}.json"
    if not path.is_file():
        raise ParseError(f"no bundled example {name!r}; available: {bundled_names()}")
    return loads(path.read_text(encoding="utf-8"))
