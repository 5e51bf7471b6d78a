import numpy as np
import pytest

from ssmgan import tensorfile
from ssmgan.errors import FormatError

MAGIC = b"TEST"


def test_round_trip(tmp_path, rng):
    tensors = {"a": rng.normal(size=(3, 4)).astype(np.float32), "b": np.arange(5, dtype=np.float32)}
    path = tmp_path / "t.bin"
    tensorfile.dump(path, MAGIC, 2, tensors, meta={"k": 1})
    for mmap in (False, True):
        meta, back = tensorfile.load(path, MAGIC, 2, mmap=mmap)
        assert meta == {"k": 1}
        for name, arr in tensors.items():
            assert np.array_equal(back[name], arr)


def test_data_section_aligned():
    buf = tensorfile.dumps(MAGIC, 1, {"a": np.ones(3, np.float32)})
    assert (len(buf) - 12) % 4 == 0
    assert buf[-12:] == np.ones(3, "<f4").tobytes()


def test_loads_bytes(rng):
    t = {"x": rng.normal(size=7).astype(np.float32)}
    meta, back = tensorfile.loads(tensorfile.dumps(MAGIC, 1, t), MAGIC, 1)
    assert np.array_equal(back["x"], t["x"])


@pytest.mark.parametrize(
    "mutate,match",
    [
        (lambda b: b"XXXX" + b[4:], "magic"),
        (lambda b: b[:4] + b"\x09\x00" + b[6:], "version"),
        (lambda b: b[:6], "shorter"),
        (lambda b: b[:20], "truncated"),
        (lambda b: b[:-2], "float32|past end"),
    ],
)
def test_corruption_detected(mutate, match):
    buf = tensorfile.dumps(MAGIC, 1, {"a": np.ones(8, np.float32)})
    with pytest.raises(FormatError, match=match):
        tensorfile.loads(mutate(buf), MAGIC, 1)
