"""Read and write the k-FCIDUMP text format.

Layout (UTF-8, whitespace separated, ``#`` starts a comment)::

    &KFCI NORB=<n> NELEC=<n> MESH=<N1>,<N2>,<N3> EHF=<hartree> ECONST=<hartree> /
    <re> <im> p kp q kq 0 0 0 0      one-body h(p kp; q kq)
    <re> <im> p kp q kq r kr s ks    two-body g(p kp, q kq; r kr, s ks)
    <re> <im> 0 0 0 0 0 0 0 0        constant shift, terminates the entries

Orbital indices are 1-based in the file, k indices are 0-based linear mesh
indices. The file stores the complete Hermitian key set; a stored two-body
value multiplies ``adag_{p sigma} adag_{q sigma'} a_{r sigma'} a_{s sigma}``
with a global 1/2 prefactor (spin-restricted spatial integrals). The header
ECONST and the terminator line must agree; EHF records the generating
mean-field energy for cross-validation.
"""

from __future__ import annotations

import io
import os
from typing import TextIO

from .lattice import IntegralTable, KMesh, OneBodyKey, TwoBodyKey

_HEADER_PREFIX = "&KFCI"


class KfcidumpError(ValueError):
    """Malformed or inconsistent k-FCIDUMP content."""


def _fail(line_no: int, message: str) -> "KfcidumpError":
    return KfcidumpError(f"line {line_no}: {message}")


def parse_kfcidump(path: str | os.PathLike | TextIO) -> IntegralTable:
    """Parse and fully validate a k-FCIDUMP file.

    Raises :class:`KfcidumpError` with the offending line number on parse
    errors, momentum-conservation violations, or Hermiticity violations.
    """
    if hasattr(path, "read"):
        return _parse_stream(path)  # type: ignore[arg-type]
    with open(path, "r", encoding="utf-8") as handle:
        return _parse_stream(handle)


def _parse_stream(handle: TextIO) -> IntegralTable:
    header = None
    header_line = 0
    one_body: dict[OneBodyKey, complex] = {}
    two_body: dict[TwoBodyKey, complex] = {}
    constant = None
    for line_no, raw in enumerate(handle, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            if not line.startswith(_HEADER_PREFIX):
                raise _fail(line_no, f"expected header starting with {_HEADER_PREFIX}")
            header = _parse_header(line, line_no)
            header_line = line_no
            continue
        fields = line.split()
        if len(fields) != 10:
            raise _fail(line_no, f"expected 10 fields, got {len(fields)}")
        try:
            value = complex(float(fields[0]), float(fields[1]))
            idx = [int(f) for f in fields[2:]]
        except ValueError as exc:
            raise _fail(line_no, f"unparsable entry: {exc}") from None
        if all(i == 0 for i in idx):
            if constant is not None:
                raise _fail(line_no, "duplicate constant terminator")
            if abs(value.imag) > 1e-12:
                raise _fail(line_no, "constant shift must be real")
            constant = value.real
            continue
        if constant is not None:
            raise _fail(line_no, "entry after the constant terminator")
        p, kp, q, kq, r, kr, s, ks = idx
        mesh = KMesh(header["mesh"])
        if r == 0 and s == 0 and kr == 0 and ks == 0:
            key = _one_body_key(p, kp, q, kq, header, line_no)
            if key in one_body:
                raise _fail(line_no, f"duplicate one-body entry {key}")
            _check_momentum_1b(key, mesh, line_no)
            one_body[key] = value
        else:
            key2 = _two_body_key(idx, header, line_no)
            if key2 in two_body:
                raise _fail(line_no, f"duplicate two-body entry {key2}")
            _check_momentum_2b(key2, mesh, line_no)
            two_body[key2] = value
    if header is None:
        raise KfcidumpError("empty file: no header found")
    if constant is None:
        raise _fail(header_line, "missing constant terminator line")
    if abs(constant - header["econst"]) > 1e-10:
        raise _fail(
            header_line,
            f"header ECONST={header['econst']} disagrees with terminator {constant}",
        )
    try:
        return IntegralTable(
            KMesh(header["mesh"]),
            header["norb"],
            header["nelec"],
            constant,
            one_body,
            two_body,
            ehf=header["ehf"],
        )
    except ValueError as exc:
        raise KfcidumpError(str(exc)) from None


def _parse_header(line: str, line_no: int) -> dict:
    body = line[len(_HEADER_PREFIX) :].strip()
    if not body.endswith("/"):
        raise _fail(line_no, "header must end with '/'")
    body = body[:-1]
    fields = {}
    for token in body.split():
        if "=" not in token:
            raise _fail(line_no, f"malformed header token {token!r}")
        key, value = token.split("=", 1)
        fields[key.upper()] = value
    try:
        mesh = tuple(int(x) for x in fields["MESH"].split(","))
        out = {
            "norb": int(fields["NORB"]),
            "nelec": int(fields["NELEC"]),
            "mesh": mesh,
            "ehf": float(fields["EHF"]) if "EHF" in fields else None,
            "econst": float(fields.get("ECONST", "0.0")),
        }
    except (KeyError, ValueError) as exc:
        raise _fail(line_no, f"bad header: {exc}") from None
    if len(out["mesh"]) != 3:
        raise _fail(line_no, "MESH needs three comma-separated integers")
    return out


def _one_body_key(p, kp, q, kq, header, line_no) -> OneBodyKey:
    for orb in (p, q):
        if not 1 <= orb <= header["norb"]:
            raise _fail(line_no, f"orbital index {orb} outside 1..{header['norb']}")
    nk = header["mesh"][0] * header["mesh"][1] * header["mesh"][2]
    for k in (kp, kq):
        if not 0 <= k < nk:
            raise _fail(line_no, f"k index {k} outside 0..{nk - 1}")
    return (p - 1, kp, q - 1, kq)


def _two_body_key(idx, header, line_no) -> TwoBodyKey:
    p, kp, q, kq, r, kr, s, ks = idx
    for orb in (p, q, r, s):
        if not 1 <= orb <= header["norb"]:
            raise _fail(line_no, f"orbital index {orb} outside 1..{header['norb']}")
    nk = header["mesh"][0] * header["mesh"][1] * header["mesh"][2]
    for k in (kp, kq, kr, ks):
        if not 0 <= k < nk:
            raise _fail(line_no, f"k index {k} outside 0..{nk - 1}")
    return (p - 1, kp, q - 1, kq, r - 1, kr, s - 1, ks)


def _check_momentum_1b(key: OneBodyKey, mesh: KMesh, line_no: int):
    from .lattice import momentum_allowed

    _, kp, _, kq = key
    if not momentum_allowed([mesh.triple(kp)], [mesh.triple(kq)], mesh):
        raise _fail(line_no, "one-body entry violates crystal momentum conservation")


def _check_momentum_2b(key: TwoBodyKey, mesh: KMesh, line_no: int):
    from .lattice import momentum_allowed

    _, kp, _, kq, _, kr, _, ks = key
    creation = [mesh.triple(kp), mesh.triple(kq)]
    annihilation = [mesh.triple(kr), mesh.triple(ks)]
    if not momentum_allowed(creation, annihilation, mesh):
        raise _fail(line_no, "two-body entry violates crystal momentum conservation")


def write_kfcidump(
    table: IntegralTable,
    path: str | os.PathLike | TextIO,
    comment: str | None = None,
):
    """Serialize a table; keys are sorted so output is deterministic and
    byte-identical across runs."""
    if hasattr(path, "write"):
        _write_stream(table, path, comment)  # type: ignore[arg-type]
        return
    with open(path, "w", encoding="utf-8") as handle:
        _write_stream(table, handle, comment)


def _write_stream(table: IntegralTable, out: TextIO, comment: str | None):
    if comment:
        for line in comment.splitlines():
            out.write(f"# {line}\n")
    mesh = ",".join(str(d) for d in table.mesh.dims)
    ehf = table.ehf if table.ehf is not None else 0.0
    out.write(
        f"&KFCI NORB={table.n_orb} NELEC={table.n_electrons} MESH={mesh}"
        f" EHF={ehf!r} ECONST={table.constant!r} /\n"
    )
    for (p, kp, q, kq), v in sorted(table.one_body.items()):
        out.write(f"{v.real!r} {v.imag!r} {p + 1} {kp} {q + 1} {kq} 0 0 0 0\n")
    for (p, kp, q, kq, r, kr, s, ks), v in sorted(table.two_body.items()):
        out.write(
            f"{v.real!r} {v.imag!r} {p + 1} {kp} {q + 1} {kq}"
            f" {r + 1} {kr} {s + 1} {ks}\n"
        )
    out.write(f"{table.constant!r} 0.0 0 0 0 0 0 0 0 0\n")


def dumps(table: IntegralTable, comment: str | None = None) -> str:
    buf = io.StringIO()
    _write_stream(table, buf, comment)
    return buf.getvalue()
