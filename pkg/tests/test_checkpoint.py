import numpy as np
import pytest

from seq2bf.checkpoint import (
    CheckpointFormatError,
    load_checkpoint,
    save_checkpoint,
)
from seq2bf.seq2seq import EncoderDecoder, load_model, save_model


class TestContainer:
    def test_bit_exact_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        tensors = {
            "a": rng.normal(size=(7, 3)).astype(np.float32),
            "b": (rng.normal(size=(11,)) * 1e-20).astype(np.float32),  # subnormals
            "c": np.array([-0.0, 0.0, np.float32(1 / 3)], dtype=np.float32),
        }
        meta = {"component": "backward", "vocab_sha256": "deadbeef", "k": ""}
        path = tmp_path / "m.s2bf"
        save_checkpoint(path, tensors, meta)
        loaded, loaded_meta = load_checkpoint(path)
        assert loaded_meta == meta
        for name in tensors:
            assert loaded[name].dtype == np.float32
            assert loaded[name].shape == tensors[name].shape
            assert loaded[name].tobytes() == tensors[name].tobytes()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "junk"
        path.write_bytes(b"XXXX" + b"\x00" * 32)
        with pytest.raises(CheckpointFormatError):
            load_checkpoint(path)

    def test_rejects_multiline_metadata(self, tmp_path):
        with pytest.raises(ValueError):
            save_checkpoint(tmp_path / "m", {}, {"k": "a\nb"})

    def test_loaded_tensors_are_writable(self, tmp_path):
        save_checkpoint(tmp_path / "m", {"a": np.zeros(3, dtype=np.float32)}, {})
        loaded, _ = load_checkpoint(tmp_path / "m")
        loaded["a"][0] = 1.0  # must not raise


class TestModelRoundTrip:
    def test_all_tensors_survive(self, tmp_path):
        model = EncoderDecoder.init(vocab_size=12, embed_dim=5, hidden_dim=6,
                                    rng_seed=3)
        path = tmp_path / "model.s2bf"
        save_model(model, path, "forward", vocab_sha256="cafe", config_sha256="01")
        loaded, meta = load_model(path)
        assert meta["component"] == "forward"
        assert meta["vocab_sha256"] == "cafe"
        assert meta["config_sha256"] == "01"
        assert int(meta["embed_dim"]) == 5
        original = model.parameters()
        restored = loaded.parameters()
        assert set(original) == set(restored)
        assert len(original) == 21  # embed + 2x9 GRU tensors + projection w/b
        for name in original:
            assert original[name].values.tobytes() == restored[name].values.tobytes()

    def test_component_name_validated(self, tmp_path):
        model = EncoderDecoder.init(8, 4, 4, rng_seed=0)
        from seq2bf.corpus import ConfigError
        with pytest.raises(ConfigError):
            save_model(model, tmp_path / "x", "sideways", vocab_sha256="")
