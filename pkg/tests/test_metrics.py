import math

import pytest

from seq2bf.bf import ReplyResult
from seq2bf.metrics import (
    MetricsReport,
    UndefinedMetricError,
    UnigramModel,
    avg_length,
    bleu2_char,
    decomposed_entropy,
    entropy,
)


def result(reply: str, keyword: str, start: int) -> ReplyResult:
    return ReplyResult(reply_chars=reply, reply_ids=(), keyword=keyword,
                       keyword_start=start, backward_logprob=0.0,
                       forward_logprob=0.0, pmi_score=0.0)


class TestUnigram:
    def test_uniform_support_with_equal_counts(self):
        # (c+1)/(4c+4) = 1/4 for any c: add-one keeps uniformity
        model = UnigramModel({"a": 3, "b": 3, "c": 3, "d": 3}, "abcd")
        assert all(p == 0.25 for p in model.probs.values())

    def test_probabilities_sum_to_one(self):
        model = UnigramModel({"a": 17, "b": 1}, "abc")
        assert sum(model.probs.values()) == pytest.approx(1.0, abs=1e-12)
        assert all(p > 0 for p in model.probs.values())

    def test_out_of_support_raises_without_unk(self):
        model = UnigramModel({"a": 1}, "a")
        with pytest.raises(UndefinedMetricError):
            model.log2p("z")

    def test_unk_slot_absorbs_when_enabled(self):
        model = UnigramModel({"a": 1}, "a", include_unk=True)
        assert model.log2p("z") == model.log2p("☃")


class TestEntropy:
    def test_uniform_four_chars_exactly_two_bits(self):
        model = UnigramModel({c: 5 for c in "abcd"}, "abcd")
        assert entropy(["abcd", "ddd", "a"], model) == pytest.approx(2.0, abs=1e-9)

    def test_degenerate_single_char_zero_bits(self):
        model = UnigramModel({"a": 100}, "a")
        assert entropy(["aaa", "a"], model) == pytest.approx(0.0, abs=1e-12)

    def test_hand_summed_three_reply_fixture(self):
        # support {a,b}, counts a=3, b=1 -> p(a)=4/6, p(b)=2/6
        model = UnigramModel({"a": 3, "b": 1}, "ab")
        replies = ["ab", "a", "bba"]
        # chars: a,b,a,b,b,a -> 3x a, 3x b
        expected = -(3 * math.log2(4 / 6) + 3 * math.log2(2 / 6)) / 6
        assert entropy(replies, model) == pytest.approx(expected, abs=1e-9)

    def test_no_characters_is_undefined(self):
        model = UnigramModel({"a": 1}, "a")
        with pytest.raises(UndefinedMetricError):
            entropy(["", ""], model)

    def test_additivity_over_concatenation(self):
        model = UnigramModel({"a": 3, "b": 1, "c": 9}, "abc")
        set1 = ["abc", "aa"]
        set2 = ["cb", "b", "ccc"]
        h1, n1 = entropy(set1, model), sum(len(r) for r in set1)
        h2, n2 = entropy(set2, model), sum(len(r) for r in set2)
        combined = entropy(set1 + set2, model)
        assert combined == pytest.approx((n1 * h1 + n2 * h2) / (n1 + n2), abs=1e-12)

    def test_invariant_to_duplication(self):
        model = UnigramModel({"a": 3, "b": 1}, "ab")
        replies = ["ab", "ba"]
        assert entropy(replies, model) == pytest.approx(entropy(replies * 7, model))


class TestDecomposedEntropy:
    def test_identical_distributions_give_equal_halves(self):
        model = UnigramModel({"a": 2, "b": 2}, "ab")
        results = [result("abab", "ab", 1), result("baba", "ba", 3)]
        kw, rem = decomposed_entropy(results, model)
        assert kw == pytest.approx(rem, abs=1e-12)

    def test_rare_keyword_chars_score_higher(self):
        # z is rare, a is common; keywords are made of z
        model = UnigramModel({"a": 50, "z": 1}, "az")
        results = [result("aazaa", "z", 3), result("zaa", "z", 1)]
        kw, rem = decomposed_entropy(results, model)
        assert kw > rem

    def test_hand_tabled_two_result_fixture(self):
        model = UnigramModel({"a": 3, "b": 1}, "ab")  # p(a)=4/6, p(b)=2/6
        results = [result("ba", "b", 1), result("ab", "b", 2)]
        kw, rem = decomposed_entropy(results, model)
        assert kw == pytest.approx(-math.log2(2 / 6), abs=1e-12)
        assert rem == pytest.approx(-math.log2(4 / 6), abs=1e-12)

    def test_weighted_mean_recomposes_total(self):
        model = UnigramModel({"a": 3, "b": 1, "z": 2}, "abz")
        results = [result("azb", "z", 2), result("bz", "z", 2)]
        kw, rem = decomposed_entropy(results, model)
        total = entropy([r.reply_chars for r in results], model)
        n_kw = sum(len(r.keyword) for r in results)
        n_rem = sum(len(r.reply_chars) - len(r.keyword) for r in results)
        assert total == pytest.approx((n_kw * kw + n_rem * rem) / (n_kw + n_rem),
                                      abs=1e-9)

    def test_degraded_result_rejected(self):
        model = UnigramModel({"a": 1}, "a")
        bad = ReplyResult("aa", (), None, None, None, 0.0, None)
        with pytest.raises(UndefinedMetricError):
            decomposed_entropy([bad], model)


class TestAvgLength:
    def test_mean(self):
        assert avg_length(["ab", "abcd"]) == pytest.approx(3.0)

    def test_constant(self):
        assert avg_length(["abc"] * 9) == pytest.approx(3.0)

    def test_empty_rejected(self):
        with pytest.raises(UndefinedMetricError):
            avg_length([])


class TestBleu2:
    def test_identical_sets_score_one(self):
        sents = ["hello there", "ab", "xyz"]
        assert bleu2_char(sents, sents) == pytest.approx(1.0)

    def test_zero_bigram_overlap_scores_zero(self):
        assert bleu2_char(["abab"], ["cdcd"]) == 0.0
        # a volunteer's perfectly fine reply can share no bigram at all
        assert bleu2_char(["ax", "by"], ["xa", "yb"]) == 0.0

    def test_hand_counted_fixture(self):
        # cand "abcd" vs ref "abed": 1-gram 3/4, 2-gram 1/3
        # cand "xy" vs ref "xz": 1-gram 1/2, 2-gram 0/1
        # p1 = 4/6, p2 = 1/4, lengths equal -> bp = 1
        expected = math.sqrt((4 / 6) * (1 / 4))
        assert bleu2_char(["abcd", "xy"], ["abed", "xz"]) == pytest.approx(
            expected, abs=1e-9)

    def test_brevity_penalty(self):
        # candidate "ab" vs reference "abab": p1=1, p2=1, bp=exp(1-4/2)
        expected = math.exp(1 - 4 / 2)
        assert bleu2_char(["ab"], ["abab"]) == pytest.approx(expected, abs=1e-9)

    def test_range(self):
        import numpy as np
        rng = np.random.default_rng(0)
        for _ in range(40):
            cands = ["".join(rng.choice(list("abc"), size=rng.integers(1, 8)))
                     for _ in range(3)]
            refs = ["".join(rng.choice(list("abc"), size=rng.integers(1, 8)))
                    for _ in range(3)]
            score = bleu2_char(cands, refs)
            assert 0.0 <= score <= 1.0
            if score == 1.0:
                assert cands == refs

    def test_works_on_id_sequences(self):
        assert bleu2_char([[4, 5, 6]], [[4, 5, 6]]) == pytest.approx(1.0)

    def test_misaligned_inputs_rejected(self):
        with pytest.raises(ValueError):
            bleu2_char(["a"], ["a", "b"])


class TestReport:
    def test_save_and_lines(self, tmp_path):
        report = MetricsReport(reply_count=3, avg_length=4.5, entropy=2.25,
                               keyword_entropy=5.0, remaining_entropy=2.0,
                               bleu2=0.5, config_sha256="ff")
        path = tmp_path / "report.txt"
        report.save(path)
        text = path.read_text(encoding="utf-8")
        assert "entropy_bits=2.250000" in text
        assert "keyword_entropy_bits=5.000000" in text
        assert "bleu2=0.500000" in text
        assert "config_sha256=ff" in text
        assert "reply_count" in report.table()
