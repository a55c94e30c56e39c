"""Report generation: classifier opinion -> prompt -> chat backend -> parse.

The chat backend is a single ``complete(prompt) -> text`` surface with two
shipped implementations: a deterministic mock keyed on the opinion phrase
(used by every test) and a generic chat-completion HTTP client.  Correctness
of the pipeline never depends on real model weights.
"""

from __future__ import annotations

import concurrent.futures
import re
import time
from dataclasses import dataclass, field

import numpy as np

from .exceptions import BackendUnavailableError, MalformedOutputError, ValidationError

CLASS_NAMES = ["Benign", "Malignant", "Gall.", "COVID", "Pneu."]

# Short class label -> clinical phrase used in prompts and mock replies.
CLINICAL_PHRASES = [
    "Benign breast lesion",
    "Malignant breast lesion",
    "Gallbladder disease",
    "COVID-19 pneumonia",
    "Bacterial pneumonia",
]

GUIDELINE_TAGS = ["BI-RADS-5th", "BI-RADS-5th", "ACG-2022", "IDSA-ATS-2019", "IDSA-ATS-2019"]

EMPTY_SLOT = "None provided"

PROMPT_TEMPLATE = (
    "You are a senior ultrasound imaging diagnostic expert. Based on the "
    "information below, determine the patient's possible condition and provide "
    "diagnostic recommendations.\n"
    "\n"
    "- Ultrasound Imaging Diagnosis Opinion: {model_result}\n"
    "- Chief Complaint: {chief_complaint}\n"
    "- Physical Examination: {physical_exam}\n"
    "- Additional Information: {additional_info}\n"
    "\n"
    "Please reason according to international diagnostic guidelines and "
    "generate a medically standardized recommendation using professional "
    "terminology. The output format should be:\n"
    "\n"
    "- Preliminary Diagnosis:\n"
    "- Justification:\n"
    "- Recommended Follow-Up Examinations:\n"
)

SECTION_HEADERS = (
    "Preliminary Diagnosis",
    "Justification",
    "Recommended Follow-Up Examinations",
)


@dataclass(frozen=True)
class ClinicalContext:
    chief_complaint: str
    physical_exam: str = ""
    additional_info: str = ""

    def __post_init__(self):
        if not self.chief_complaint.strip():
            raise ValidationError("chief_complaint must be non-empty")


@dataclass(frozen=True)
class DiagnosisOpinion:
    class_id: int
    label_text: str
    confidence: float
    guideline_tag: str
    tie: bool = False

    @property
    def clinical_phrase(self) -> str:
        return CLINICAL_PHRASES[self.class_id]


@dataclass
class DiagnosisReport:
    preliminary_diagnosis: str
    justification: str
    follow_up: str
    raw_response: str = ""
    model_id: str = ""
    latency_ms: int = 0


@dataclass
class LLMBackendSpec:
    kind: str = "mock"  # mock | http_chat
    endpoint_url: str = ""
    model_name: str = "DeepSeek-R1-7B"
    timeout_ms: int = 30_000
    max_retries: int = 2
    temperature: float = 0.0
    auth_token: str = ""

    def __post_init__(self):
        if self.kind not in ("mock", "http_chat"):
            raise ValidationError(f"unknown backend kind {self.kind!r}")
        if self.timeout_ms <= 0:
            raise ValidationError("timeout_ms must be > 0")
        if self.max_retries < 0:
            raise ValidationError("max_retries must be >= 0")
        if self.kind == "http_chat" and not self.endpoint_url:
            raise ValidationError("http_chat backend needs endpoint_url")


def opinion_from_probs(probs, class_names: list[str] | None = None) -> DiagnosisOpinion:
    """Argmax with lowest-class-id tie-break; ties recorded in metadata."""
    names = class_names or CLASS_NAMES
    probs = np.asarray(probs, dtype=float).reshape(-1)
    if probs.shape[0] != len(names):
        raise ValidationError(
            f"got {probs.shape[0]} probabilities for {len(names)} classes"
        )
    class_id = int(probs.argmax())
    tie = bool((probs == probs[class_id]).sum() > 1)
    return DiagnosisOpinion(
        class_id=class_id,
        label_text=names[class_id],
        confidence=float(probs[class_id]),
        guideline_tag=GUIDELINE_TAGS[class_id],
        tie=tie,
    )


def opinion_from_prediction(pred, class_names=None, index: int = 0) -> DiagnosisOpinion:
    _, probs = pred.numpy()
    return opinion_from_probs(probs[index], class_names)


def build_prompt(opinion: DiagnosisOpinion, ctx: ClinicalContext) -> str:
    """Render the fixed template; empty optional slots read "None provided"."""

    def slot(text: str) -> str:
        return text if text.strip() else EMPTY_SLOT

    return PROMPT_TEMPLATE.format(
        model_result=opinion.clinical_phrase,
        chief_complaint=slot(ctx.chief_complaint),
        physical_exam=slot(ctx.physical_exam),
        additional_info=slot(ctx.additional_info),
    )


# ---------------------------------------------------------------------------
# Backends
# ---------------------------------------------------------------------------

class MockChatBackend:
    """Scripted backend: replies with a canned report keyed on the opinion
    phrase found in the prompt.  ``fixed_response`` overrides everything."""

    def __init__(self, fixed_response: str | None = None, delay_s: float = 0.0,
                 model_id: str = "mock"):
        self.fixed_response = fixed_response
        self.delay_s = delay_s
        self.model_id = model_id
        self.call_count = 0

    def complete(self, prompt: str) -> str:
        self.call_count += 1
        if self.delay_s:
            time.sleep(self.delay_s)
        if self.fixed_response is not None:
            return self.fixed_response
        for class_id, phrase in enumerate(CLINICAL_PHRASES):
            if phrase in prompt:
                return _canned_report(class_id)
        return _canned_report(None)


class HttpChatBackend:
    """Generic chat-completion client: one POST per attempt, first choice wins."""

    def __init__(self, spec: LLMBackendSpec):
        self.spec = spec
        self.model_id = spec.model_name
        self.call_count = 0

    def complete(self, prompt: str) -> str:
        import httpx

        self.call_count += 1
        headers = {"Content-Type": "application/json"}
        if self.spec.auth_token:
            headers["Authorization"] = f"Bearer {self.spec.auth_token}"
        payload = {
            "model": self.spec.model_name,
            "temperature": self.spec.temperature,
            "messages": [{"role": "user", "content": prompt}],
        }
        timeout = self.spec.timeout_ms / 1000.0
        response = httpx.post(
            self.spec.endpoint_url, json=payload, headers=headers, timeout=timeout
        )
        response.raise_for_status()
        data = response.json()
        try:
            choice = data["choices"][0]
            if "message" in choice:
                return choice["message"]["content"]
            return choice["text"]
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedOutputError(
                f"unrecognized completion payload: {exc}", raw_text=str(data)
            ) from exc


def backend_from_spec(spec: LLMBackendSpec):
    if spec.kind == "mock":
        return MockChatBackend(model_id=spec.model_name)
    return HttpChatBackend(spec)


def generate_report(
    prompt: str,
    backend,
    spec: LLMBackendSpec | None = None,
    backoff_base_s: float = 0.05,
    strict_parse: bool = False,
) -> DiagnosisReport:
    """Call the backend with timeout plus bounded retries, then parse.

    Timeouts and malformed replies both consume retry budget; total blocking
    time is bounded by ``timeout_ms * (max_retries + 1)`` plus the backoff sum.
    """
    spec = spec or LLMBackendSpec()
    attempts = spec.max_retries + 1
    timeout_s = spec.timeout_ms / 1000.0
    last_error: Exception | None = None

    for attempt in range(attempts):
        if attempt > 0:
            time.sleep(backoff_base_s * (2 ** (attempt - 1)))
        started = time.monotonic()
        executor = concurrent.futures.ThreadPoolExecutor(max_workers=1)
        try:
            future = executor.submit(backend.complete, prompt)
            raw = future.result(timeout=timeout_s)
        except concurrent.futures.TimeoutError:
            last_error = BackendUnavailableError(
                f"backend timed out after {spec.timeout_ms} ms "
                f"(attempt {attempt + 1}/{attempts})"
            )
            continue
        except MalformedOutputError as exc:
            last_error = exc
            continue
        except Exception as exc:
            last_error = BackendUnavailableError(
                f"backend call failed (attempt {attempt + 1}/{attempts}): {exc}"
            )
            continue
        finally:
            executor.shutdown(wait=False)

        latency_ms = int((time.monotonic() - started) * 1000.0)
        try:
            report = parse_report(raw, strict=strict_parse)
        except MalformedOutputError as exc:
            last_error = exc
            continue
        report.raw_response = raw
        report.model_id = getattr(backend, "model_id", spec.model_name)
        report.latency_ms = latency_ms
        return report

    assert last_error is not None
    last_error.attempts = attempts
    raise last_error


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _header_pattern(name: str, strict: bool) -> re.Pattern:
    words = r"[ \t]+".join(re.escape(w) for w in name.split())
    if strict:
        return re.compile(rf"^{words}:", re.MULTILINE)
    # Tolerate list markers and bold/underscore markup around the header,
    # with the colon either inside or outside the closing markup.
    return re.compile(
        rf"^[ \t]*(?:[-*•]|\d+[.)])?[ \t]*(?:\*\*|__)?[ \t]*{words}[ \t]*"
        rf"(?::[ \t]*(?:\*\*|__)?|(?:\*\*|__)[ \t]*:)",
        re.MULTILINE | re.IGNORECASE,
    )


def parse_report(raw: str, strict: bool = False) -> DiagnosisReport:
    """Locate the three section headers by name and slice the text between."""
    if not raw or not raw.strip():
        raise MalformedOutputError("empty response", raw_text=raw or "")

    spans: dict[str, tuple[int, int]] = {}
    for header in SECTION_HEADERS:
        matches = list(_header_pattern(header, strict).finditer(raw))
        if not matches:
            raise MalformedOutputError(
                f"missing section header {header!r}", raw_text=raw
            )
        if len(matches) > 1:
            raise MalformedOutputError(
                f"duplicate section header {header!r} (ambiguous)", raw_text=raw
            )
        spans[header] = (matches[0].start(), matches[0].end())

    boundaries = sorted(start for start, _ in spans.values())
    sections: dict[str, str] = {}
    for header, (start, end) in spans.items():
        following = [b for b in boundaries if b > start]
        stop = following[0] if following else len(raw)
        sections[header] = raw[end:stop].strip()

    for header in SECTION_HEADERS:
        if not sections[header]:
            raise MalformedOutputError(
                f"section {header!r} is empty", raw_text=raw
            )
    return DiagnosisReport(
        preliminary_diagnosis=sections[SECTION_HEADERS[0]],
        justification=sections[SECTION_HEADERS[1]],
        follow_up=sections[SECTION_HEADERS[2]],
        raw_response=raw,
    )


def render_report(preliminary: str, justification: str, follow_up: str) -> str:
    """Inverse of :func:`parse_report` for section texts free of the headers."""
    return (
        f"Preliminary Diagnosis: {preliminary}\n"
        f"Justification: {justification}\n"
        f"Recommended Follow-Up Examinations: {follow_up}\n"
    )


_CANNED = {
    0: (
        "The lesion shows features most consistent with a benign breast mass "
        "such as a fibroadenoma (BI-RADS class 3).",
        "Well-circumscribed margins, homogeneous echotexture and absence of "
        "posterior shadowing favor a benign process under BI-RADS criteria.",
        "1. Short-interval follow-up ultrasound in 6 months.\n"
        "2. Clinical breast examination.\n"
        "3. Core-needle biopsy only if the lesion grows or changes.",
    ),
    1: (
        "The findings are highly suggestive of invasive cancer (BI-RADS "
        "class 4B). Other possibilities such as fibroadenoma are less likely "
        "given the malignant ultrasound features.",
        "An irregular hypoechoic mass with unclear boundaries in a "
        "middle-aged patient meets BI-RADS criteria for suspicious "
        "malignancy; pathological confirmation is urgent.",
        "1. Core-needle biopsy for pathological confirmation.\n"
        "2. Preoperative evaluation including CBC, biochemistry and chest CT.\n"
        "3. Multidisciplinary tumor board review to plan treatment.",
    ),
    2: (
        "The presentation is consistent with acute cholecystitis on a "
        "background of cholelithiasis.",
        "Fever with right-upper-quadrant tenderness and known gallbladder "
        "stones satisfies the Tokyo/ACG diagnostic criteria for acute "
        "cholecystitis.",
        "1. Serial inflammatory markers (CBC, CRP) and blood cultures.\n"
        "2. Contrast-enhanced abdominal CT to assess complications.\n"
        "3. Surgical consultation for definitive biliary source control.",
    ),
    3: (
        "Findings indicate COVID-19 pneumonia with bilateral pleural "
        "involvement.",
        "Diffuse B-lines with a fragmented pleural line on lung ultrasound "
        "are characteristic of viral pneumonia in the pandemic context, per "
        "IDSA/ATS guidance.",
        "1. RT-PCR confirmation of SARS-CoV-2.\n"
        "2. Pulse oximetry monitoring and chest CT if hypoxia develops.\n"
        "3. Isolation precautions and supportive management.",
    ),
    4: (
        "Findings indicate bacterial pneumonia with lobar consolidation.",
        "Focal consolidation with air bronchograms on lung ultrasound "
        "supports a bacterial etiology under IDSA/ATS criteria.",
        "1. Sputum and blood cultures before antibiotics.\n"
        "2. Empiric antimicrobial therapy per IDSA/ATS guidance.\n"
        "3. Follow-up imaging to confirm resolution.",
    ),
}


def _canned_report(class_id: int | None) -> str:
    if class_id is None:
        return render_report(
            "Nonspecific findings; clinical correlation required.",
            "The supplied opinion did not match a known category.",
            "1. Repeat ultrasound examination.\n2. Clinical re-assessment.",
        )
    pre, just, follow = _CANNED[class_id]
    return render_report(pre, just, follow)
