/** Shared case snapshots used by the component tests. */

import { CaseDetail, CaseStatus, Opinion, Report, ScoreSheet } from '../src/types'

export const OPINION: Opinion = {
  class_id: 1,
  label: 'Malignant',
  confidence: 0.9,
  probs: [0.02, 0.9, 0.04, 0.02, 0.02],
  guideline_tag: 'BI-RADS-5th',
  tie: false,
}

export const REPORT: Report = {
  preliminary_diagnosis: 'Highly suggestive of invasive cancer.',
  justification: 'Irregular margins on the clip.',
  follow_up: '1.Biopsy',
  raw_response: 'raw',
  model_id: 'mock',
  latency_ms: 3,
}

export const SHEET: ScoreSheet = {
  S_amateur: 11 / 3,
  S_expert: 3.5,
  meteor: 0.42,
  final: 3.2533,
  final_display: '3.25',
  reference_text: 'ref',
}

/** Server-consistent snapshot for each status of the machine. */
export function makeDetail(status: CaseStatus, withVideo = true): CaseDetail {
  const past = (s: CaseStatus) =>
    ['created', 'classified', 'reported', 'graded', 'scored'].indexOf(status) >=
    ['created', 'classified', 'reported', 'graded', 'scored'].indexOf(s)
  return {
    case_id: 'c1',
    status,
    context: { chief_complaint: 'Cough.', physical_exam: '', additional_info: '' },
    video_ref: withVideo || status !== 'created' ? 'blobs/c1.npz' : null,
    opinion: past('classified') ? OPINION : null,
    report: past('reported') ? REPORT : null,
    grades: past('graded') ? [{ rater_id: 'r', role: 'expert' as const, score: 4 }] : [],
    score: past('scored') ? SHEET : null,
    timestamps: { created: '2026-01-01T00:00:00+00:00' },
    revision: 1,
  }
}
