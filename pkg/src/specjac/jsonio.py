"""JSON encoding of the core types.

Conventions: exact rationals are decimal strings "p/q"; complex numbers
are [re, im] pairs; polynomial coefficient lists are ascending in the
z-power (index = power), which is the storage order even though the
coefficient-slot convention elsewhere counts down from the leading term.
Dumps are deterministic (sorted keys, fixed float repr), so identical
inputs serialize byte-identically and survive a write/read cycle
bit-exactly.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .algebra import EXACT, FLOAT, Poly, PolyMatrix
from .curve import SpectralCurve
from .errors import DomainError
from .euler import GradedCharacter
from .lax import LaxMatrix
from .sov import Divisor


def encode_scalar(x, backend):
    if backend == EXACT:
        f = Fraction(x)
        return f"{f.numerator}/{f.denominator}"
    c = complex(x)
    return [c.real, c.imag]


def decode_scalar(obj, backend):
    if backend == EXACT:
        num, _, den = str(obj).partition("/")
        return Fraction(int(num), int(den or "1"))
    re, im = obj
    return complex(re, im)


def encode_poly(p: Poly, backend):
    return [encode_scalar(c, backend) for c in p.coeffs]


def decode_poly(obj, backend) -> Poly:
    return Poly([decode_scalar(c, backend) for c in obj])


def encode_matrix(M: LaxMatrix) -> dict:
    out = {
        "kind": "lax_matrix",
        "N": M.N,
        "n": M.n,
        "shape": M.shape,
        "backend": M.backend,
        "entries": [
            [encode_poly(M.mat[i, j], M.backend) for j in range(M.N)]
            for i in range(M.N)
        ],
    }
    if M.s11 is not None:
        out["s11"] = encode_scalar(M.s11, M.backend)
    return out


def decode_matrix(obj: dict) -> LaxMatrix:
    backend = obj["backend"]
    mat = PolyMatrix(
        [[decode_poly(p, backend) for p in row] for row in obj["entries"]]
    )
    s11 = decode_scalar(obj["s11"], backend) if "s11" in obj else None
    return LaxMatrix(obj["N"], obj["n"], obj["shape"], mat, backend, s11=s11)


def encode_curve(c: SpectralCurve, backend) -> dict:
    return {
        "kind": "spectral_curve",
        "N": c.N,
        "n": c.n,
        "backend": backend,
        "t": [encode_poly(tk, backend) for tk in c.t],
    }


def decode_curve(obj: dict) -> SpectralCurve:
    backend = obj.get("backend", FLOAT)
    return SpectralCurve(obj["N"], obj["n"], [decode_poly(t, backend) for t in obj["t"]])


def encode_divisor(d: Divisor) -> dict:
    return {
        "kind": "divisor",
        "N": d.N,
        "n": d.n,
        "points": [
            [[z.real, z.imag], [w.real, w.imag]] for z, w in d.points
        ],
        "source": {
            "which": d.source.get("which"),
            "seed": d.source.get("seed"),
            "xi": [[[c.real, c.imag] for c in xi] for xi in d.source.get("xi", [])],
        },
        "genericity": d.genericity,
        "residuals": list(d.residuals),
    }


def decode_divisor(obj: dict) -> Divisor:
    points = [
        (complex(z[0], z[1]), complex(w[0], w[1])) for z, w in obj["points"]
    ]
    src = dict(obj.get("source", {}))
    src["xi"] = [[complex(c[0], c[1]) for c in xi] for xi in src.get("xi", [])]
    return Divisor(
        obj["N"],
        obj["n"],
        points,
        src,
        dict(obj.get("genericity", {})),
        list(obj.get("residuals", [])),
    )


def encode_character(ch: GradedCharacter) -> dict:
    return {
        "kind": "graded_character",
        "sign": ch.sign,
        "q_power": ch.q_power,
        "num": list(ch.num),
        "den": list(ch.den),
    }


def decode_character(obj: dict) -> GradedCharacter:
    return GradedCharacter(
        obj["sign"], obj["q_power"], tuple(obj["num"]), tuple(obj["den"])
    )


_DECODERS = {
    "lax_matrix": decode_matrix,
    "spectral_curve": decode_curve,
    "divisor": decode_divisor,
    "graded_character": decode_character,
}


def decode(obj: dict):
    kind = obj.get("kind")
    if kind not in _DECODERS:
        raise DomainError(f"unknown or missing kind {kind!r} in JSON object")
    return _DECODERS[kind](obj)


def dumps(obj) -> str:
    """Deterministic JSON text: sorted keys, newline-terminated."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def loads(text: str):
    return json.loads(text)
