import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ssmgan.bitstream import (
    ABS_SPLIT,
    DELTA_SPLIT,
    FIELD_WIDTHS,
    PACKET_BITS,
    CodebookSet,
    CodedPacket,
    FeatureFrame,
    dequantize_packet,
    dequantize_stream,
    frames_to_matrix,
    make_codebooks,
    pack_packet,
    parse_packet,
    read_stream,
    write_stream,
)
from ssmgan.errors import FieldRangeError, FormatError

NAMES = [n for n, _ in FIELD_WIDTHS]
WIDTHS = dict(FIELD_WIDTHS)


def packets_strategy():
    return st.builds(CodedPacket, *(st.integers(0, (1 << w) - 1) for _, w in FIELD_WIDTHS))


def test_layout_matches_table():
    assert [w for _, w in FIELD_WIDTHS] == [6, 3, 2, 7, 30, 13, 3]
    assert PACKET_BITS == 64
    assert list(CodedPacket._fields) == NAMES


def test_zero_packet_is_zero_bytes():
    assert pack_packet(CodedPacket()) == bytes(8)
    assert parse_packet(bytes(8)) == CodedPacket()


def test_max_pitch_lag_sets_leading_six_bits():
    assert pack_packet(CodedPacket(pitch_lag_idx=63)) == b"\xfc" + bytes(7)


def test_all_ones_parse_to_field_maxima():
    pkt = parse_packet(b"\xff" * 8)
    assert pkt == CodedPacket(*((1 << w) - 1 for _, w in FIELD_WIDTHS))


@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("which", ["min", "one", "max"])
def test_field_boundaries_round_trip(name, which):
    w = WIDTHS[name]
    value = {"min": 0, "one": 1, "max": (1 << w) - 1}[which]
    pkt = CodedPacket()._replace(**{name: value})
    raw = pack_packet(pkt)
    assert parse_packet(raw) == pkt
    # the field occupies exactly its bit span
    offset = sum(WIDTHS[n] for n in NAMES[:NAMES.index(name)])
    shift = 64 - offset - w
    assert int.from_bytes(raw, "big") == value << shift


@pytest.mark.parametrize("name", NAMES)
def test_out_of_range_names_field(name):
    pkt = CodedPacket()._replace(**{name: 1 << WIDTHS[name]})
    with pytest.raises(FieldRangeError, match=name):
        pack_packet(pkt)


@pytest.mark.parametrize("bad", [-1, 1.5, True])
def test_non_index_values_rejected(bad):
    with pytest.raises(FieldRangeError):
        pack_packet(CodedPacket(pitch_lag_idx=bad))


@given(packets_strategy())
def test_parse_inverts_pack(pkt):
    assert parse_packet(pack_packet(pkt)) == pkt


@given(st.binary(min_size=8, max_size=8))
def test_pack_inverts_parse(raw):
    assert pack_packet(parse_packet(raw)) == raw


@pytest.mark.parametrize("n", [0, 7, 9])
def test_parse_rejects_wrong_length(n):
    with pytest.raises(FormatError):
        parse_packet(bytes(n))


def test_stream_round_trip_and_bitrate(rng):
    pkts = [parse_packet(rng.bytes(8)) for _ in range(25)]
    info, back = read_stream(write_stream(pkts))
    assert back == pkts
    assert info.packet_count == 25
    assert info.bitrate == 1600
    assert info.duration_s == 1.0
    assert info.n_samples == 16000


def test_empty_stream():
    info, pkts = read_stream(write_stream([]))
    assert pkts == [] and info.packet_count == 0


def test_truncated_stream_rejected():
    data = write_stream([CodedPacket()] * 3)
    with pytest.raises(FormatError, match="payload"):
        read_stream(data[:-1])
    with pytest.raises(FormatError):
        read_stream(data[:5])


def test_bad_magic_rejected():
    data = bytearray(write_stream([CodedPacket()]))
    data[:4] = b"XXXX"
    with pytest.raises(FormatError, match="magic"):
        read_stream(bytes(data))


def test_container_header_layout():
    data = write_stream([CodedPacket()] * 2, sample_rate=16000)
    assert data[:4] == b"SMG1"
    assert int.from_bytes(data[4:6], "little") == 1
    assert int.from_bytes(data[6:10], "little") == 16000
    assert int.from_bytes(data[10:14], "little") == 2
    assert len(data) == 14 + 16


# dequantization


def test_codebooks_deterministic_per_seed():
    a, b, c = make_codebooks(3), make_codebooks(3), make_codebooks(4)
    for name, t in a.tables().items():
        assert np.array_equal(t, b.tables()[name])
    assert not np.array_equal(a.abs_tables[0], c.abs_tables[0])


def test_codebooks_cover_index_ranges(books):
    assert books.lag_table.shape == (64,)
    assert books.mod_table.shape == (8, 4)
    assert books.corr_table.shape == (4,)
    assert books.energy_table.shape == (128,)
    assert books.interp_table.shape == (8,)
    for (w, lo, hi), t in zip(ABS_SPLIT, books.abs_tables):
        assert t.shape == (1 << w, hi - lo)
    for (w, lo, hi), t in zip(DELTA_SPLIT, books.delta_tables):
        assert t.shape == (1 << w, hi - lo)
        assert not t[0].any()


def test_codebook_file_round_trip(tmp_path, books):
    path = tmp_path / "cb.smcb"
    books.save(path)
    back = CodebookSet.load(path)
    for name, t in books.tables().items():
        assert np.array_equal(t, back.tables()[name])


def test_codebook_shape_check():
    books = make_codebooks(0)
    with pytest.raises(FormatError, match="energy_table"):
        CodebookSet(**{**books.__dict__, "energy_table": books.energy_table[:10]})


def test_zero_packet_first_frame_uses_entry_zero(books):
    frames = dequantize_packet(CodedPacket(), None, books)
    assert len(frames) == 4
    expected = np.concatenate([t[0] for t in books.abs_tables])
    for f in frames:
        assert np.array_equal(f.cepstrum[1:], expected)
        assert f.cepstrum[0] == books.energy_table[0]
        assert f.pitch_corr == books.corr_table[0]
        assert f.pitch_lag_idx == 0


@given(packets_strategy())
def test_stationary_input_stays_stationary(pkt):
    books = make_codebooks(0)
    # a zero delta index means "no correction" so repeating a packet is a steady state
    pkt = pkt._replace(cepstrum_delta_idx=0)
    frames = dequantize_stream([pkt, pkt, pkt], books)
    for j in range(4):
        np.testing.assert_allclose(frames[8 + j].cepstrum, frames[4 + j].cepstrum, atol=1e-6)
        np.testing.assert_allclose(frames[4 + j].cepstrum, frames[3].cepstrum, atol=1e-6)


def test_interpolation_rule(books, rng):
    prev = rng.uniform(-1, 1, 18).astype(np.float32)
    for idx, w in enumerate(books.interp_table):
        pkt = CodedPacket(cepstrum_abs_idx=12345, cepstrum_delta_idx=77, cepstrum_interp_idx=idx)
        f = dequantize_packet(pkt, prev, books)
        left = prev.copy()
        left[0] = 0
        a = f[3].cepstrum.copy()
        a[0] = 0
        mid = f[1].cepstrum.copy()
        mid[0] = 0
        np.testing.assert_allclose(f[0].cepstrum[1:], ((1 - w) * left + w * mid)[1:], atol=1e-6)
        np.testing.assert_allclose(f[2].cepstrum[1:], ((1 - w) * mid + w * a)[1:], atol=1e-6)


def test_energy_applies_to_all_frames(books, rng):
    prev = rng.uniform(-1, 1, 18)
    f = dequantize_packet(CodedPacket(energy_idx=100), prev, books)
    assert all(fr.cepstrum[0] == books.energy_table[100] for fr in f)


def test_pitch_modulation_offsets(books):
    for mod in range(8):
        f = dequantize_packet(CodedPacket(pitch_lag_idx=30, pitch_mod_idx=mod), None, books)
        assert [fr.pitch_lag_idx for fr in f] == list(30 + books.mod_table[mod])


def test_pitch_lag_clamped(books):
    f = dequantize_packet(CodedPacket(pitch_lag_idx=63, pitch_mod_idx=7), None, books)
    assert max(fr.pitch_lag_idx for fr in f) == 63


def test_dequantize_deterministic(books, rng):
    pkt = parse_packet(rng.bytes(8))
    prev = rng.uniform(-1, 1, 18)
    assert dequantize_packet(pkt, prev, books) == dequantize_packet(pkt, prev, books)


# feature frames


@pytest.mark.parametrize(
    "kwargs",
    [
        {"cepstrum": np.zeros(17)},
        {"cepstrum": np.full(18, np.nan)},
        {"pitch_lag_idx": 64},
        {"pitch_lag_idx": -1},
        {"pitch_corr": 1.01},
    ],
)
def test_feature_frame_validation(kwargs):
    base = {"cepstrum": np.zeros(18), "pitch_lag_idx": 0, "pitch_corr": 0.5}
    with pytest.raises(ValueError):
        FeatureFrame(**{**base, **kwargs})


def test_feature_matrix_round_trip(rng):
    frames = [FeatureFrame(rng.normal(size=18), int(rng.integers(64)), float(rng.uniform()))
              for _ in range(5)]
    m = frames_to_matrix(frames)
    assert m.shape == (5, 20)
    assert [FeatureFrame.from_array(r) for r in m] == frames
