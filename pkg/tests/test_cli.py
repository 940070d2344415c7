import json

import pytest

from seq2bf.checkpoint import load_checkpoint
from seq2bf.cli import main
from seq2bf.corpus import Vocab
from seq2bf.pmi import load_stats


def test_no_arguments_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err.lower()


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["build-vocab", "--no-such-flag", "1"])
    assert exc.value.code == 2


def test_runtime_failure_exits_1(capsys):
    code = main(["build-vocab", "--corpus", "/nonexistent/file.tsv",
                 "--vocab", "/tmp/ignored.txt"])
    assert code == 1
    assert "error" in capsys.readouterr().err.lower()


def test_build_vocab_and_pmi_train(tmp_path, capsys):
    corpus = tmp_path / "corpus.tsv"
    corpus.write_text("ra in\tum br\nra xx\tum zz\n", encoding="utf-8")
    lexicon = tmp_path / "lexicon.txt"
    lexicon.write_text("um\nzz\nqq\n", encoding="utf-8")
    vocab_path = tmp_path / "vocab.txt"
    stats_path = tmp_path / "stats.bin"

    code = main(["build-vocab", "--corpus", str(corpus),
                 "--vocab", str(vocab_path), "--vocab-cap", "50"])
    assert code == 0
    out = capsys.readouterr().out
    assert "config vocab_cap=50" in out
    assert "seed 0" in out
    vocab = Vocab.load(vocab_path)
    assert vocab.size > 4

    code = main(["pmi-train", "--corpus", str(corpus), "--vocab", str(vocab_path),
                 "--lexicon", str(lexicon), "--stats", str(stats_path),
                 "--out-lexicon", str(tmp_path / "lex.filtered")])
    assert code == 0
    stats = load_stats(stats_path)
    assert stats.pair_total == 2
    kept = (tmp_path / "lex.filtered").read_text(encoding="utf-8").split()
    assert "um" in kept and "qq" not in kept


def test_train_writes_checkpoint_and_log(tmp_path):
    corpus = tmp_path / "corpus.tsv"
    corpus.write_text("ab\tcd\ncd\tab\nbc\tda\n", encoding="utf-8")
    vocab_path = tmp_path / "vocab.txt"
    ckpt = tmp_path / "model.s2bf"
    assert main(["build-vocab", "--corpus", str(corpus),
                 "--vocab", str(vocab_path)]) == 0
    code = main(["train", "--component", "backward", "--corpus", str(corpus),
                 "--vocab", str(vocab_path), "--checkpoint", str(ckpt),
                 "--embed-dim", "12", "--hidden-dim", "12", "--epochs", "3",
                 "--patience", "3", "--batch-size", "3", "--lr-embed", "0.1"])
    assert code == 0
    _, meta = load_checkpoint(ckpt)
    assert meta["component"] == "backward"
    assert meta["vocab_sha256"] == Vocab.load(vocab_path).sha256
    assert len(meta["config_sha256"]) == 64  # config echo in the artifact
    log_lines = (ckpt.parent / "model.s2bf.log").read_text().strip().split("\n")
    assert len(log_lines) == 3
    assert all(len(line.split("\t")) == 3 for line in log_lines)


def test_generate_emits_tsv_with_keyword_column(bundle_dir, tmp_path, capsys):
    queries = tmp_path / "queries.txt"
    queries.write_text("qa fd\nqb fe\n", encoding="utf-8")
    code = main(["generate", "--mode", "seq2bf",
                 "--bundle", str(bundle_dir / "bundle.manifest"),
                 "--queries", str(queries), "--max-len", "24"])
    assert code == 0
    captured = capsys.readouterr()
    assert "config " in captured.err  # config echo goes to stderr here
    rows = [line.split("\t") for line in captured.out.strip().split("\n")]
    assert len(rows) == 2
    assert rows[0][0] == "qa fd"
    assert rows[0][2] == "zv"  # keyword column
    assert rows[1][2] == "xw"
    start = int(rows[1][3])
    assert rows[1][1][start - 1 : start + 1] == "xw"


def test_generate_nokw_mode_empty_keyword_column(bundle_dir, tmp_path, capsys):
    queries = tmp_path / "queries.txt"
    queries.write_text("qa fd\n", encoding="utf-8")
    assert main(["generate", "--mode", "seq2bf-nokw",
                 "--bundle", str(bundle_dir / "bundle.manifest"),
                 "--queries", str(queries)]) == 0
    row = capsys.readouterr().out.strip("\n").split("\t")
    assert row[2] == "" and row[3] == ""


def test_eval_identical_files_bleu_one(bundle_dir, tmp_path, capsys):
    cands = tmp_path / "c.txt"
    cands.write_text("zvmm\nmmxwnn\n", encoding="utf-8")
    report_path = tmp_path / "report.txt"
    code = main(["eval", "--candidates", str(cands), "--references", str(cands),
                 "--corpus", str(bundle_dir / "corpus.tsv"),
                 "--vocab", str(bundle_dir / "vocab.txt"),
                 "--out", str(report_path)])
    assert code == 0
    text = report_path.read_text(encoding="utf-8")
    assert "bleu2=1.000000" in text
    assert "reply_count=2" in text
    assert "bleu2" in capsys.readouterr().out


def test_seed_env_var_and_paper_defaults(tmp_path, capsys, monkeypatch):
    corpus = tmp_path / "corpus.tsv"
    corpus.write_text("ab\tcd\n", encoding="utf-8")
    monkeypatch.setenv("SEQ2BF_SEED", "99")
    assert main(["build-vocab", "--paper-defaults", "--corpus", str(corpus),
                 "--vocab", str(tmp_path / "v.txt")]) == 0
    out = capsys.readouterr().out
    assert "seed 99" in out  # env var picked up
    assert "config embed_dim=500" in out  # published dims pinned
    assert "config lr_embed=20" in out


def test_config_file_with_overrides(tmp_path, capsys):
    corpus = tmp_path / "corpus.tsv"
    corpus.write_text("ab\tcd\n", encoding="utf-8")
    cfg_file = tmp_path / "run.json"
    cfg_file.write_text(json.dumps({"vocab_cap": 30, "seed": 5}), encoding="utf-8")
    assert main(["build-vocab", "--config", str(cfg_file),
                 "--corpus", str(corpus), "--vocab", str(tmp_path / "v.txt"),
                 "--vocab-cap", "10"]) == 0
    out = capsys.readouterr().out
    assert "config vocab_cap=10" in out  # flag beats file
    assert "seed 5" in out  # file beats default
