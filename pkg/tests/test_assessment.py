import pytest
from hypothesis import given
from hypothesis import strategies as st

from autous.agent import DiagnosisReport
from autous.assessment import (
    AMATEUR,
    EXPERT,
    Grade,
    GradeSheet,
    MeteorParams,
    aggregate_likert,
    final_display,
    final_score,
    meteor,
    report_text_for_scoring,
    score_case,
    stem,
    tokenize,
)
from autous.exceptions import ValidationError


def grades_case1():
    return [
        Grade("amateur-1", AMATEUR, 4),
        Grade("amateur-2", AMATEUR, 5),
        Grade("amateur-3", AMATEUR, 2),
        Grade("expert-1", EXPERT, 4),
        Grade("expert-2", EXPERT, 3),
    ]


def grades_case2():
    return [
        Grade("amateur-1", AMATEUR, 4),
        Grade("amateur-2", AMATEUR, 5),
        Grade("amateur-3", AMATEUR, 3),
        Grade("expert-1", EXPERT, 4),
        Grade("expert-2", EXPERT, 3),
    ]


# ---------------------------------------------------------------------------
# Tokenization and stemming
# ---------------------------------------------------------------------------

def test_tokenize():
    assert tokenize("The CAT, sat-on 2 mats!") == ["the", "cat", "sat", "on", "2", "mats"]
    assert tokenize("") == []
    assert tokenize("...") == []


def test_stem_rules():
    assert stem("masses") == "mass"
    assert stem("biopsies") == "biopsy"
    assert stem("lesions") == "lesion"
    assert stem("glass") == "glass"
    assert stem("virus") == "virus"
    assert stem("jumping") == "jump"
    assert stem("jumped") == "jump"
    assert stem("quickly") == "quick"
    assert stem("invasive") == "invasiv"
    assert stem("cat") == "cat"


# ---------------------------------------------------------------------------
# METEOR
# ---------------------------------------------------------------------------

def test_meteor_identical_ten_tokens():
    # m=10 contiguous: F=1, penalty 0.5*(1/10)^3 = 0.0005.
    text = "one two three four five six seven eight nine ten"
    assert meteor(text, text) == pytest.approx(0.9995, abs=1e-12)


def test_meteor_identical_single_token():
    # One token is a single chunk over one match: penalty = 0.5.
    assert meteor("cat", "cat") == pytest.approx(0.5, abs=1e-12)


def test_meteor_disjoint_is_zero():
    assert meteor("alpha beta", "gamma delta") == 0.0


def test_meteor_empty_cases():
    assert meteor("", "") == 1.0
    assert meteor("words here", "") == 0.0
    assert meteor("", "words here") == 0.0


def test_meteor_partial_overlap_known_value():
    # hyp "a b" vs ref "a b c d": P=1, R=1/2, F=10/19; one chunk of two
    # matches: penalty 0.5*(1/2)^3 = 1/16.
    expected = (10.0 / 19.0) * (15.0 / 16.0)
    assert meteor("a b", "a b c d") == pytest.approx(expected, abs=1e-12)


def test_meteor_recall_weighted_fmean():
    # Dropping reference words hurts more than adding hypothesis words.
    ref = "one two three four five six seven eight"
    shorter_hyp = meteor("one two three four", ref)
    longer_hyp = meteor(ref + " extra words appended here", ref)
    assert longer_hyp > shorter_hyp


def test_meteor_fragmentation_penalty():
    contiguous = meteor("a b c d e f", "a b c d e f")
    scrambled = meteor("f e d c b a", "a b c d e f")
    assert scrambled < contiguous


def test_meteor_swapped_pair_value():
    # Perfect unigram overlap in 2 chunks: F=1, penalty 0.5*(2/2)^3 = 0.5.
    assert meteor("b a", "a b") == pytest.approx(0.5, abs=1e-12)


def test_meteor_stemming_stage():
    assert meteor("jumped", "jumping") == pytest.approx(0.5, abs=1e-12)
    off = MeteorParams(enable_stemming=False)
    assert meteor("jumped", "jumping", off) == 0.0


def test_meteor_synonym_stage():
    assert meteor("physician", "doctor") == 0.0
    params = MeteorParams(synonym_table={"physician": {"doctor"}})
    assert meteor("physician", "doctor", params) == pytest.approx(0.5, abs=1e-12)
    # The table applies in both directions.
    assert meteor("doctor", "physician", params) == pytest.approx(0.5, abs=1e-12)


def test_meteor_within_unit_interval():
    samples = [
        ("a b c", "c b a"),
        ("the mass is benign", "the lesion is malignant"),
        ("x", "x y z w v u t s r q"),
    ]
    for hyp, ref in samples:
        value = meteor(hyp, ref)
        assert 0.0 <= value <= 1.0


def test_meteor_params_validation():
    with pytest.raises(ValidationError):
        MeteorParams(penalty_gamma=0.0)
    with pytest.raises(ValidationError):
        MeteorParams(fmean_precision_weight=-1.0)


# ---------------------------------------------------------------------------
# Likert aggregation
# ---------------------------------------------------------------------------

def test_grade_validation():
    with pytest.raises(ValidationError):
        Grade("r", "clinician", 4)
    with pytest.raises(ValidationError):
        Grade("r", AMATEUR, 0)
    with pytest.raises(ValidationError):
        Grade("r", AMATEUR, 6)
    with pytest.raises(ValidationError):
        Grade("r", AMATEUR, True)


def test_aggregate_published_case1():
    s_am, s_ex = aggregate_likert(grades_case1())
    assert s_am == pytest.approx(11.0 / 3.0, abs=1e-12)
    assert s_ex == pytest.approx(3.5, abs=1e-12)


def test_aggregate_requires_both_roles():
    with pytest.raises(ValidationError):
        aggregate_likert([Grade("a", AMATEUR, 4)])
    with pytest.raises(ValidationError):
        aggregate_likert([Grade("e", EXPERT, 4)])
    with pytest.raises(ValidationError):
        aggregate_likert([])


# ---------------------------------------------------------------------------
# Final score
# ---------------------------------------------------------------------------

def test_final_score_case1():
    s_am, s_ex = aggregate_likert(grades_case1())
    value = final_score(s_am, s_ex, 0.42)
    assert value == pytest.approx(3.2533, abs=5e-5)
    assert final_display(value) == "3.25"


def test_final_score_case2():
    s_am, s_ex = aggregate_likert(grades_case2())
    value = final_score(s_am, s_ex, 0.39)
    assert value == pytest.approx(3.29, abs=1e-12)
    assert final_display(value) == "3.29"


def test_final_score_extremes():
    assert final_score(1.0, 1.0, 0.0) == pytest.approx(0.8)
    assert final_score(5.0, 5.0, 1.0) == pytest.approx(5.0)


def test_final_score_validation():
    with pytest.raises(ValidationError):
        final_score(0.5, 3.0, 0.5)
    with pytest.raises(ValidationError):
        final_score(3.0, 5.5, 0.5)
    with pytest.raises(ValidationError):
        final_score(3.0, 3.0, 1.5)
    with pytest.raises(ValidationError):
        final_score(3.0, 3.0, -0.1)


@given(
    s_am=st.floats(min_value=1.0, max_value=5.0),
    s_ex=st.floats(min_value=1.0, max_value=5.0),
    m=st.floats(min_value=0.0, max_value=1.0),
    bump=st.floats(min_value=0.01, max_value=1.0),
)
def test_final_score_monotone(s_am, s_ex, m, bump):
    base = final_score(s_am, s_ex, m)
    assert final_score(min(5.0, s_am + bump), s_ex, m) >= base
    assert final_score(s_am, min(5.0, s_ex + bump), m) >= base
    assert final_score(s_am, s_ex, min(1.0, m + bump)) >= base


@given(
    s_am=st.floats(min_value=1.0, max_value=5.0),
    s_ex=st.floats(min_value=1.0, max_value=5.0),
    m=st.floats(min_value=0.0, max_value=1.0),
)
def test_final_score_bounded(s_am, s_ex, m):
    value = final_score(s_am, s_ex, m)
    assert 0.8 <= value <= 5.0


# ---------------------------------------------------------------------------
# End-to-end case scoring
# ---------------------------------------------------------------------------

def sample_report():
    return DiagnosisReport(
        preliminary_diagnosis="Invasive cancer suspected.",
        justification="Irregular mass with unclear boundaries.",
        follow_up="1. Biopsy. 2. Chest CT.",
    )


def test_report_text_excludes_headers():
    text = report_text_for_scoring(sample_report())
    assert "Preliminary Diagnosis" not in text
    assert "Invasive cancer suspected." in text
    assert "1. Biopsy. 2. Chest CT." in text


def test_score_case_end_to_end():
    report = sample_report()
    reference = report_text_for_scoring(report)
    sheet, value = score_case(report, reference, grades_case1())
    m = sheet.meteor
    assert m > 0.99  # identity up to the tiny chunk penalty
    s_am, s_ex = aggregate_likert(grades_case1())
    assert value == pytest.approx(final_score(s_am, s_ex, m), abs=1e-12)


def test_score_case_validation():
    with pytest.raises(ValidationError):
        score_case(sample_report(), "  ", grades_case1())
    with pytest.raises(ValidationError):
        score_case(sample_report(), "reference text", [])


def test_grade_sheet_meteor_bounds():
    with pytest.raises(ValidationError):
        GradeSheet(grades=grades_case1(), meteor=1.2)
