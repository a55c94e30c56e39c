/**
 * Payload shapes of the case service API, mirrored field for field.
 * The console never computes scores or transitions itself; everything in
 * here is what the server sends back.
 */

export type CaseStatus =
  | 'created'
  | 'classified'
  | 'reported'
  | 'graded'
  | 'scored'

export const STATUS_ORDER: CaseStatus[] = [
  'created',
  'classified',
  'reported',
  'graded',
  'scored',
]

export type RaterRole = 'amateur' | 'expert'

export interface ClinicalContext {
  chief_complaint: string
  physical_exam: string
  additional_info: string
}

export interface Opinion {
  class_id: number
  label: string
  confidence: number
  probs: number[]
  guideline_tag: string
  tie: boolean
}

export interface Report {
  preliminary_diagnosis: string
  justification: string
  follow_up: string
  raw_response: string
  model_id: string
  latency_ms: number
}

export interface GradeEntry {
  rater_id: string
  role: RaterRole
  score: number
}

export interface ScoreSheet {
  S_amateur: number
  S_expert: number
  meteor: number
  final: number
  final_display: string
  reference_text: string
}

export interface CaseDetail {
  case_id: string
  status: CaseStatus
  context: ClinicalContext
  video_ref: string | null
  video_bytes?: number
  opinion: Opinion | null
  report: Report | null
  grades: GradeEntry[]
  score: ScoreSheet | null
  timestamps: Record<string, string>
  revision: number
}

export interface CaseSummary {
  case_id: string
  status: CaseStatus
  label: string | null
  final: number | null
  final_display: string | null
  created: string | null
}

export interface HealthInfo {
  status: string
  model_loaded: boolean
  backend: string
}

export interface UploadResult {
  case_id: string
  video_ref: string
  bytes: number
}

/** Uniform error body the service attaches to every non-2xx response. */
export interface ErrorEnvelope {
  code: string
  message: string
  detail: unknown
}
