import pytest
from hypothesis import given
from hypothesis import strategies as st

from morphcheck.core import TextInput
from morphcheck.errors import NoApplicableSite, PlaceholderMissing
from morphcheck import transforms as tr


def ti(text, id="t0"):
    return TextInput(id=id, text=text)


class TestConcatSentence:
    def test_concat_at_start(self):
        t = tr.ConcatSentence("Thank you.", "start")
        out = tr.apply(t, ti("Light, cute and forgettable."))
        assert out.text == "Thank you. Light, cute and forgettable."

    def test_concat_at_end(self):
        t = tr.ConcatSentence("My friends were happy, though.", "end")
        out = tr.apply(t, ti("A masterpiece four years in the making."))
        assert out.text == "A masterpiece four years in the making. My friends were happy, though."

    def test_output_differs_from_input(self):
        t = tr.ConcatSentence("Thank you.", "start")
        x = ti("Some review.")
        assert tr.apply(t, x).text != x.text

    def test_id_carries_fingerprint(self):
        t = tr.ConcatSentence("Thank you.", "start")
        out = tr.apply(t, ti("Some review.", id="r1"))
        assert out.id.startswith("r1#")
        assert t.fingerprint() in out.id


class TestWordReplace:
    def test_synonym_table(self):
        lex = tr.Lexicon(entries={"cat": ("pet",), "sat": ("stood",), "on": ("onto",)})
        t = tr.SynonymReplace(lexicon=lex, rate=1.0, seed=1)
        out = tr.apply(t, ti("The cat sat on the mat."))
        assert out.text == "The pet stood onto the mat."

    def test_no_applicable_site(self):
        lex = tr.Lexicon(entries={"zebra": ("horse",)})
        t = tr.SynonymReplace(lexicon=lex, rate=1.0, seed=1)
        with pytest.raises(NoApplicableSite):
            tr.apply(t, ti("The cat sat."))

    def test_keyword_swap(self):
        t = tr.KeywordSwap(mapping={"he": "she", "she": "he"})
        out = tr.apply(t, ti("he said that she left."))
        assert out.text == "she said that he left."

    def test_lexicon_rejects_self_mapping(self):
        with pytest.raises(ValueError):
            tr.Lexicon(entries={"cat": ("cat",)})


class TestCharNoise:
    def test_swap_single_char_identity(self):
        t = tr.CharSwapNeighbors(rate=1.0, seed=42)
        out = tr.apply(t, ti("x"))
        assert out.text == "x"

    def test_swap_changes_at_full_rate(self):
        t = tr.CharSwapNeighbors(rate=1.0, seed=42)
        out = tr.apply(t, ti("abcdef"))
        assert out.text != "abcdef"
        assert sorted(out.text) == list("abcdef")

    def test_keyboard_typo_stays_adjacent(self):
        t = tr.CharKeyboardTypo(rate=1.0, seed=7)
        out = tr.apply(t, ti("qwerty"))
        layout = tr.KeyboardLayout()
        for orig, new in zip("qwerty", out.text):
            assert new == orig or new in layout.neighbors[orig]

    def test_random_replace_changes_letter(self):
        t = tr.CharRandomReplace(rate=1.0, seed=3)
        out = tr.apply(t, ti("abc, abc."))
        # punctuation untouched, every letter replaced by a different one
        assert out.text[3] == "," and out.text[-1] == "."
        for orig, new in zip("abc abc", out.text.replace(",", "").replace(".", "")):
            if orig != " ":
                assert new != orig

    def test_shuffle_word_keeps_ends(self):
        t = tr.CharShuffleWord(rate=1.0, seed=5)
        out = tr.apply(t, ti("extraordinary"))
        assert out.text[0] == "e" and out.text[-1] == "y"
        assert sorted(out.text) == sorted("extraordinary")

    def test_sentence_shuffle_preserves_sentences(self):
        t = tr.SentenceShuffle(seed=9)
        out = tr.apply(t, ti("One. Two! Three?"))
        assert sorted(out.text.split()) == sorted("One. Two! Three?".split())


class TestDeterminism:
    @given(st.sampled_from(["hello world", "a b c d", "The rain in spain.", "x"]), st.integers(0, 2**32))
    def test_apply_is_deterministic(self, text, seed):
        t = tr.CharSwapNeighbors(rate=0.5, seed=seed)
        x = ti(text, id=f"id{seed}")
        assert tr.apply(t, x).text == tr.apply(t, x).text

    def test_randomness_depends_on_id_not_global_state(self):
        t = tr.CharShuffleWord(rate=1.0, seed=1)
        a = tr.apply(t, ti("extraordinary measures", id="a"))
        b = tr.apply(t, ti("extraordinary measures", id="a"))
        assert a.text == b.text


class TestTemplates:
    def test_instantiate_pair_table_shape(self):
        out = tr.instantiate_pair("There was no ⟨x⟩.", "tree", "cherry tree")
        assert out.text == "There was no tree. There was no cherry tree."
        (s1, e1), (s2, e2) = out.spans
        assert out.text[s1:e1] == "tree"
        assert out.text[s2:e2] == "cherry tree"

    def test_instantiate_pair_equal_insertions(self):
        out = tr.instantiate_pair("There was no ⟨x⟩.", "tree", "tree")
        (s1, e1), (s2, e2) = out.spans
        assert (s1, e1) != (s2, e2)
        assert out.text[s1:e1] == out.text[s2:e2] == "tree"

    def test_bare_placeholder(self):
        out = tr.instantiate_pair("⟨x⟩", "a", "b", separator=" ")
        assert out.text == "a b"
        assert out.spans == ((0, 1), (2, 3))

    def test_placeholder_missing(self):
        with pytest.raises(PlaceholderMissing):
            tr.instantiate_pair("no placeholder here", "a", "b")

    def test_template_transform_requires_placeholder(self):
        t = tr.TemplateInstantiate(context="a ⟨x⟩ b", insertion="thing")
        with pytest.raises(PlaceholderMissing):
            tr.apply(t, ti("no placeholder"))

    def test_template_context_validated(self):
        with pytest.raises(PlaceholderMissing):
            tr.TemplateInstantiate(context="⟨x⟩ and ⟨x⟩", insertion="x")

    @given(st.text(alphabet="abc ", min_size=1, max_size=10).filter(str.strip),
           st.text(alphabet="xyz", min_size=1, max_size=8))
    def test_span_bookkeeping_round_trip(self, prefix, insertion):
        context = prefix + "⟨x⟩" + prefix[::-1]
        out = tr.instantiate_pair(context, insertion, insertion + "z")
        (s1, e1), (s2, e2) = out.spans
        assert out.text[s1:e1] == insertion
        assert out.text[s2:e2] == insertion + "z"


class TestFormPair:
    def test_ordered(self):
        a = ti("arrangement", id="w1")
        b = ti("symmetrical", id="w2")
        out = tr.form_pair(a, b, "<sep>")
        assert out.text == "arrangement<sep>symmetrical"
        assert out.id == "(w1,w2)"

    def test_not_symmetric(self):
        a = ti("symmetrical", id="w2")
        b = ti("together", id="w3")
        assert tr.form_pair(a, b, "<sep>").text == "symmetrical<sep>together"
        assert tr.form_pair(a, b, " ").text != tr.form_pair(b, a, " ").text

    def test_self_pair(self):
        w = ti("w", id="w")
        assert tr.form_pair(w, w, "<sep>").text == "w<sep>w"


class TestLexiconFiles:
    def test_tsv_round_trip(self, tmp_path):
        p = tmp_path / "lex.tsv"
        p.write_text("cat\tpet,feline\nsat\tstood\n")
        lex = tr.Lexicon.from_tsv(p)
        assert lex.lookup("cat") == ("pet", "feline")
        assert lex.lookup("CAT") == ("pet", "feline")

    def test_keyboard_tsv(self, tmp_path):
        p = tmp_path / "kb.tsv"
        p.write_text("a\tqsz\n")
        layout = tr.KeyboardLayout.from_tsv(p)
        assert layout.neighbors["a"] == ("q", "s", "z")

    def test_context_and_insertion_loaders(self, tmp_path):
        cp = tmp_path / "ctx.jsonl"
        cp.write_text('{"context": "no ⟨x⟩.", "monotonicity": "down"}\n')
        ip = tmp_path / "ins.jsonl"
        ip.write_text('{"a": "tree", "b": "cherry tree", "relation": "hyper"}\n')
        assert tr.load_contexts(cp) == [("no ⟨x⟩.", "down")]
        assert tr.load_insertion_pairs(ip) == [("tree", "cherry tree", "hyper")]
