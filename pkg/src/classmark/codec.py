"""Watermark text/bit/codepoint codec and key transform.

A message becomes bits through a fixed-width codebook, the key folds
into those bits, and the keyed bits spread greedily over codepoint
sites. Every step is pure and invertible enough for verification:
decoding recomputes expected bits rather than inverting lossy keys.

Key alignment: the key is right-aligned under the bitstream, so with a
10-bit key over 15 bits of code the first 5 bits pass through and the
last 10 combine under the operator:

    code  110011001000110
    key        1100101011   (AND)
    out   110011000000010
"""

import json
from dataclasses import dataclass, field

from .bytecode import (KIND_WIDTH, BITS_TO_ARITH8, BITS_TO_BRANCH4,
                       BITS_TO_BRANCH2, CodepointKind, MODES, MODE_REPLACE)


class UnmappedCharacter(Exception):
    """Message character missing from the codebook."""


class KeyTooLong(Exception):
    """Key longer than the bitstream it should fold into."""


class InsufficientCapacity(Exception):
    """More bits than the available codepoint sites can carry."""


def _check_bits(bits: str, what: str = "bits"):
    if not all(c in "01" for c in bits):
        raise ValueError("%s must be a 0/1 string, got %r" % (what, bits))


@dataclass
class Bitstream:
    """Ordered bits with a consumption cursor."""

    bits: str = ""
    cursor: int = 0

    def __post_init__(self):
        _check_bits(self.bits)

    def take(self, n: int) -> str:
        if self.cursor + n > len(self.bits):
            raise IndexError("take(%d) past end of %d-bit stream" % (n, len(self.bits)))
        chunk = self.bits[self.cursor:self.cursor + n]
        self.cursor += n
        return chunk

    @property
    def remaining(self) -> int:
        return len(self.bits) - self.cursor

    def __len__(self):
        return len(self.bits)

    def to_hex(self) -> str:
        """Hex image, zero-padded on the right to a whole nibble."""
        if not self.bits:
            return ""
        padded = self.bits + "0" * (-len(self.bits) % 4)
        return "%0*x" % (len(padded) // 4, int(padded, 2))


class Codebook:
    """Fixed-width char->code table; decoding unknown chunks yields '?'."""

    def __init__(self, mapping: dict):
        if not mapping:
            raise ValueError("codebook is empty")
        widths = {len(code) for code in mapping.values()}
        if len(widths) != 1:
            raise ValueError("codebook codes have mixed widths %s" % sorted(widths))
        (self.width,) = widths
        for ch, code in mapping.items():
            if len(ch) != 1:
                raise ValueError("codebook key %r is not a single character" % ch)
            _check_bits(code, "code for %r" % ch)
        if len(set(mapping.values())) != len(mapping):
            raise ValueError("codebook codes are not unique")
        self.to_code = dict(mapping)
        self.to_char = {code: ch for ch, code in mapping.items()}

    def __eq__(self, other):
        return isinstance(other, Codebook) and self.to_code == other.to_code

    def __repr__(self):
        return "Codebook(%d chars, width %d)" % (len(self.to_code), self.width)


def example_codebook() -> Codebook:
    """The worked-example book: six characters, width 4."""
    return Codebook({
        " ": "0000",
        "I": "0001",
        "T": "0010",
        "S": "0011",
        "U": "0100",
        "R": "0101",
    })


def extended_codebook() -> Codebook:
    """Example book extended in appearance order to cover ITS SURABAYA."""
    book = example_codebook().to_code
    book.update({"A": "0110", "B": "0111", "Y": "1000"})
    return Codebook(book)


@dataclass
class KeySpec:
    """Key bits plus the combining operator (AND, OR, or XOR)."""

    bits: str
    op: str = "AND"

    def __post_init__(self):
        _check_bits(self.bits, "key bits")
        self.op = self.op.upper()
        if self.op not in ("AND", "OR", "XOR"):
            raise ValueError("key op must be AND, OR, or XOR, not %r" % self.op)


_OPS = {
    "AND": lambda a, b: a & b,
    "OR": lambda a, b: a | b,
    "XOR": lambda a, b: a ^ b,
}


def apply_key(bits: str, key) -> str:
    """Fold the key into the bits, right-aligned; identity when key is None."""
    if key is None or not key.bits:
        return bits
    if len(key.bits) > len(bits):
        raise KeyTooLong("%d-bit key over %d bits of code" % (len(key.bits), len(bits)))
    fn = _OPS[key.op]
    head = bits[:len(bits) - len(key.bits)]
    tail = bits[len(bits) - len(key.bits):]
    mixed = "".join(str(fn(int(a), int(b))) for a, b in zip(tail, key.bits))
    return head + mixed


def encode_chars(message: str, book: Codebook) -> Bitstream:
    out = []
    for ch in message:
        code = book.to_code.get(ch)
        if code is None:
            raise UnmappedCharacter("character %r not in codebook" % ch)
        out.append(code)
    return Bitstream("".join(out))


@dataclass
class DecodedText:
    text: str
    dropped_bits: str = ""  # trailing remainder shorter than one code

    @property
    def truncated(self) -> bool:
        return bool(self.dropped_bits)


def decode_chars(bits: str, book: Codebook) -> DecodedText:
    """Decode fixed-width chunks; unknown chunks become '?', never fatal."""
    _check_bits(bits)
    w = book.width
    whole = len(bits) - len(bits) % w
    text = "".join(book.to_char.get(bits[i:i + w], "?") for i in range(0, whole, w))
    return DecodedText(text, bits[whole:])


@dataclass
class SiteAssignment:
    """One codepoint site's new value; value None = untouched by this message."""

    kind: CodepointKind
    bits: str
    value: object  # opcode byte for opcode kinds, operand byte otherwise; or None


def bits_to_codepoints(bits: str, kinds: list) -> list:
    """Spread bits greedily over sites in order; returns one SiteAssignment per site.

    Sites left over after the bits run out get value None (untouched).
    Raises InsufficientCapacity if the sites cannot carry all the bits.
    """
    _check_bits(bits)
    capacity = sum(KIND_WIDTH[k] for k in kinds)
    if capacity < len(bits):
        raise InsufficientCapacity("need %d bits, sites carry %d (short %d)"
                                   % (len(bits), capacity, len(bits) - capacity))
    stream = Bitstream(bits)
    out = []
    for kind in kinds:
        width = KIND_WIDTH[kind]
        if stream.remaining == 0:
            out.append(SiteAssignment(kind, "", None))
            continue
        # a final partial chunk still lands in the site's leading bits,
        # zero-padded, so extraction reads the full pattern contiguously
        chunk = stream.take(min(width, stream.remaining))
        padded = chunk.ljust(width, "0")
        if kind is CodepointKind.ARITH8:
            value = BITS_TO_ARITH8[padded]
        elif kind is CodepointKind.BRANCH4:
            value = BITS_TO_BRANCH4[padded]
        elif kind is CodepointKind.BRANCH2:
            value = BITS_TO_BRANCH2[padded]
        else:
            value = int(padded, 2)
        out.append(SiteAssignment(kind, chunk, value))
    return out


def codepoints_to_bits(sites: list) -> Bitstream:
    """Inverse scan: SiteAssignments (or bare (kind, value) pairs) back
    to the bits they encode."""
    from .bytecode import ARITH8_TO_BITS, BRANCH4_TO_BITS, BRANCH2_TO_BITS
    parts = []
    for site in sites:
        kind, value = ((site.kind, site.value)
                       if isinstance(site, SiteAssignment) else site)
        if kind is CodepointKind.ARITH8:
            parts.append(ARITH8_TO_BITS[value])
        elif kind is CodepointKind.BRANCH4:
            parts.append(BRANCH4_TO_BITS[value])
        elif kind is CodepointKind.BRANCH2:
            parts.append(BRANCH2_TO_BITS[value])
        else:
            parts.append(format(value, "08b"))
    return Bitstream("".join(parts))


@dataclass
class WatermarkConfig:
    """Codebook, optional key, and embedding mode; the CLI's config file."""

    codebook: Codebook = field(default_factory=example_codebook)
    key: KeySpec = None
    mode: str = MODE_REPLACE

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError("mode must be one of %s, not %r" % (MODES, self.mode))

    @classmethod
    def from_dict(cls, data: dict) -> "WatermarkConfig":
        book = Codebook(data["codebook"]) if "codebook" in data else example_codebook()
        key = None
        if data.get("key") is not None:
            key = KeySpec(data["key"]["bits"], data["key"].get("op", "AND"))
        return cls(book, key, data.get("mode", MODE_REPLACE))

    @classmethod
    def from_json_file(cls, path) -> "WatermarkConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        out = {"codebook": dict(self.codebook.to_code), "mode": self.mode}
        if self.key is not None:
            out["key"] = {"bits": self.key.bits, "op": self.key.op}
        return out

    def keyed_bits(self, message: str) -> str:
        """encode_chars then apply_key: the pattern embed writes and verify expects."""
        return apply_key(encode_chars(message, self.codebook).bits, self.key)
