import random

import pytest

from classmark import bytecode as bc
from classmark import codec


def test_example_codebook():
    book = codec.example_codebook()
    assert book.to_code == {" ": "0000", "I": "0001", "T": "0010",
                            "S": "0011", "U": "0100", "R": "0101"}


def test_extended_codebook_is_superset():
    small = codec.example_codebook().to_code
    big = codec.extended_codebook().to_code
    assert all(big[ch] == code for ch, code in small.items())
    assert big["A"] == "0110" and big["B"] == "0111" and big["Y"] == "1000"


def test_codebook_rejects_ragged_widths():
    with pytest.raises(ValueError):
        codec.Codebook({"A": "01", "B": "011"})


def test_codebook_rejects_duplicate_codes():
    with pytest.raises(ValueError):
        codec.Codebook({"A": "01", "B": "01"})


def test_encode_its_surabaya():
    bits = codec.encode_chars("ITS SURABAYA", codec.extended_codebook()).bits
    assert bits == ("0001" "0010" "0011" "0000" "0011" "0100"
                    "0101" "0110" "0111" "0110" "1000" "0110")
    assert len(bits) == 48


def test_decode_prefix_its_sur():
    bits = "0001" "0010" "0011" "0000" "0011" "0100" "0101"
    decoded = codec.decode_chars(bits, codec.example_codebook())
    assert decoded.text == "ITS SUR"
    assert decoded.dropped_bits == ""
    assert not decoded.truncated


def test_decode_unknown_chunk_yields_question_mark():
    decoded = codec.decode_chars("1111", codec.example_codebook())
    assert decoded.text == "?"


def test_decode_keeps_partial_tail():
    decoded = codec.decode_chars("000101", codec.example_codebook())
    assert decoded.text == "I"
    assert decoded.dropped_bits == "01"
    assert decoded.truncated


def test_unmapped_character():
    with pytest.raises(codec.UnmappedCharacter):
        codec.encode_chars("ITS-X", codec.example_codebook())


def test_key_and_right_aligned():
    out = codec.apply_key("110011001000110", codec.KeySpec("1100101011", "AND"))
    assert out == "110011000000010"


def test_key_or_right_aligned():
    out = codec.apply_key("0000" "0000", codec.KeySpec("1010", "OR"))
    assert out == "0000" "1010"


def test_key_xor_is_involution():
    rng = random.Random(7)
    for _ in range(200):
        bits = "".join(rng.choice("01") for _ in range(rng.randrange(1, 40)))
        key = codec.KeySpec("".join(rng.choice("01")
                                    for _ in range(rng.randrange(1, len(bits) + 1))),
                            "XOR")
        assert codec.apply_key(codec.apply_key(bits, key), key) == bits


def test_key_longer_than_bits():
    with pytest.raises(codec.KeyTooLong):
        codec.apply_key("101", codec.KeySpec("0111", "AND"))


def test_none_key_passes_through():
    assert codec.apply_key("10110", None) == "10110"


def test_key_validates_operator_and_bits():
    with pytest.raises(ValueError):
        codec.KeySpec("1100", "NAND")
    with pytest.raises(ValueError):
        codec.KeySpec("12", "AND")


def test_bits_to_codepoints_greedy_assignment():
    kinds = [bc.CodepointKind.ARITH8, bc.CodepointKind.BRANCH4,
             bc.CodepointKind.BRANCH2, bc.CodepointKind.OPERAND_BIPUSH]
    sites = codec.bits_to_codepoints("011" "10" "1" "01010101", kinds)
    assert [(s.kind, s.bits) for s in sites] == [
        (bc.CodepointKind.ARITH8, "011"),
        (bc.CodepointKind.BRANCH4, "10"),
        (bc.CodepointKind.BRANCH2, "1"),
        (bc.CodepointKind.OPERAND_BIPUSH, "01010101"),
    ]
    assert codec.codepoints_to_bits(sites).bits == "011" "10" "1" "01010101"


def test_bits_to_codepoints_pads_final_partial_chunk():
    kinds = [bc.CodepointKind.ARITH8, bc.CodepointKind.ARITH8]
    sites = codec.bits_to_codepoints("1011", kinds)
    assert [s.bits for s in sites] == ["101", "1"]
    assert sites[1].value == bc.BITS_TO_ARITH8["100"]  # zero-padded


def test_bits_to_codepoints_insufficient_capacity():
    with pytest.raises(codec.InsufficientCapacity):
        codec.bits_to_codepoints("10101", [bc.CodepointKind.BRANCH2])


def test_config_round_trips_through_dict():
    config = codec.WatermarkConfig(codec.extended_codebook(),
                                   codec.KeySpec("1100101011", "AND"),
                                   "combined")
    again = codec.WatermarkConfig.from_dict(config.to_dict())
    assert again.to_dict() == config.to_dict()


def test_config_rejects_unknown_mode():
    with pytest.raises(ValueError):
        codec.WatermarkConfig(mode="sideways")


def test_keyed_bits_matches_manual_pipeline():
    config = codec.WatermarkConfig(codec.example_codebook(),
                                   codec.KeySpec("1100101011", "AND"),
                                   "replace_opcodes")
    manual = codec.apply_key(
        codec.encode_chars("ITS SUR", config.codebook).bits, config.key)
    assert config.keyed_bits("ITS SUR") == manual


def test_bitstream_take_and_hex():
    stream = codec.Bitstream("10100001")
    assert stream.take(3) == "101"
    assert stream.remaining == 5
    assert codec.Bitstream("10100001").to_hex() == "a1"


def test_random_encode_decode_identity():
    rng = random.Random(42)
    book = codec.extended_codebook()
    alphabet = list(book.to_code)
    for _ in range(300):
        message = "".join(rng.choice(alphabet)
                          for _ in range(rng.randrange(1, 20)))
        bits = codec.encode_chars(message, book).bits
        assert codec.decode_chars(bits, book).text == message
