/**
 * Stepper model for one case: Upload -> Classify -> Context -> Report ->
 * Grade -> Score.  Which steps are actionable is derived from the
 * server-reported case status on every render; the controller refuses to
 * issue a request the server would reject with 409, so a disabled button
 * and a forbidden call are the same check.
 *
 * Context is collected when the case is created (the API accepts it only
 * there), so inside the stepper that step is a read-back of the stored
 * fields rather than a second form.
 */

import { CaseApiClient } from './client'
import {
  CaseDetail,
  CaseStatus,
  ClinicalContext,
  GradeEntry,
  RaterRole,
  ScoreSheet,
} from './types'

export const STEPS = [
  'upload',
  'classify',
  'context',
  'report',
  'grade',
  'score',
] as const

export type StepName = (typeof STEPS)[number]

export interface StepState {
  /** An action on this step would be accepted by the server right now. */
  enabled: boolean
  /** The step's outcome is already part of the case record. */
  done: boolean
}

export type StepStates = Record<StepName, StepState>

/** Raised instead of calling the API when the status machine forbids it. */
export class StepLockedError extends Error {
  readonly step: StepName
  readonly status: CaseStatus

  constructor(step: StepName, status: CaseStatus) {
    super(`step '${step}' is not available while the case is '${status}'`)
    this.name = 'StepLockedError'
    this.step = step
    this.status = status
  }
}

export class FormValidationError extends Error {
  constructor(message: string) {
    super(message)
    this.name = 'FormValidationError'
  }
}

/**
 * Availability of every step for a given case snapshot.  This mirrors the
 * server's transition table; it never consults anything but the snapshot.
 */
export function stepStates(detail: CaseDetail): StepStates {
  const status = detail.status
  const hasVideo = detail.video_ref !== null && detail.video_ref !== undefined
  return {
    upload: {
      enabled: status === 'created',
      done: hasVideo || status !== 'created',
    },
    classify: {
      enabled: status === 'created' && hasVideo,
      done: detail.opinion !== null,
    },
    context: {
      // Entered at creation; nothing to submit from inside the stepper.
      enabled: false,
      done: true,
    },
    report: {
      enabled: status === 'classified',
      done: detail.report !== null,
    },
    grade: {
      enabled: status === 'reported' || status === 'graded',
      done: detail.grades.length > 0,
    },
    score: {
      enabled: status === 'graded',
      done: detail.score !== null,
    },
  }
}

export interface GradeForm {
  raterId: string
  role: string
  score: number
}

export interface ScoreForm {
  referenceText?: string
  meteor?: number
}

/** Grade form rules the server also enforces: 1..5 integer, known role. */
export function validateGradeForm(form: GradeForm): GradeEntry {
  const raterId = form.raterId.trim()
  if (raterId === '') {
    throw new FormValidationError('rater id must be non-empty')
  }
  if (form.role !== 'amateur' && form.role !== 'expert') {
    throw new FormValidationError("role must be 'amateur' or 'expert'")
  }
  if (!Number.isInteger(form.score) || form.score < 1 || form.score > 5) {
    throw new FormValidationError('score must be an integer from 1 to 5')
  }
  return { rater_id: raterId, role: form.role as RaterRole, score: form.score }
}

export function validateScoreForm(form: ScoreForm): ScoreForm {
  const reference = form.referenceText?.trim() ?? ''
  if (form.meteor !== undefined) {
    if (!Number.isFinite(form.meteor) || form.meteor < 0 || form.meteor > 1) {
      throw new FormValidationError('METEOR must be a number between 0 and 1')
    }
    return { meteor: form.meteor }
  }
  if (reference === '') {
    throw new FormValidationError(
      'provide a reference diagnosis or an explicit METEOR value',
    )
  }
  return { referenceText: form.referenceText }
}

/**
 * Creation-time form handling: only trailing whitespace is trimmed so the
 * stored payload carries the clinician's text verbatim.
 */
export function contextFromForm(
  chiefComplaint: string,
  physicalExam = '',
  additionalInfo = '',
): ClinicalContext {
  const ctx = {
    chief_complaint: chiefComplaint.replace(/\s+$/, ''),
    physical_exam: physicalExam.replace(/\s+$/, ''),
    additional_info: additionalInfo.replace(/\s+$/, ''),
  }
  if (ctx.chief_complaint === '') {
    throw new FormValidationError('chief complaint must be non-empty')
  }
  return ctx
}

export class WorkflowController {
  private readonly client: CaseApiClient
  private detail: CaseDetail | null = null

  constructor(client: CaseApiClient) {
    this.client = client
  }

  get case(): CaseDetail {
    if (this.detail === null) {
      throw new Error('no case loaded')
    }
    return this.detail
  }

  get steps(): StepStates {
    return stepStates(this.case)
  }

  async open(caseId: string): Promise<CaseDetail> {
    this.detail = await this.client.getCase(caseId)
    return this.detail
  }

  async create(context: ClinicalContext): Promise<CaseDetail> {
    const caseId = await this.client.createCase(context)
    return this.open(caseId)
  }

  async refresh(): Promise<CaseDetail> {
    return this.open(this.case.case_id)
  }

  private guard(step: StepName): void {
    if (!stepStates(this.case)[step].enabled) {
      throw new StepLockedError(step, this.case.status)
    }
  }

  async uploadVideo(
    data: ArrayBuffer | Uint8Array,
    filename = '',
  ): Promise<CaseDetail> {
    this.guard('upload')
    await this.client.uploadVideo(this.case.case_id, data, filename)
    return this.refresh()
  }

  async classify(): Promise<CaseDetail> {
    this.guard('classify')
    await this.client.classify(this.case.case_id)
    return this.refresh()
  }

  async generateReport(): Promise<CaseDetail> {
    this.guard('report')
    await this.client.generateReport(this.case.case_id)
    return this.refresh()
  }

  async submitGrade(form: GradeForm): Promise<CaseDetail> {
    this.guard('grade')
    const grade = validateGradeForm(form)
    await this.client.submitGrade(this.case.case_id, grade)
    return this.refresh()
  }

  async submitScore(form: ScoreForm): Promise<ScoreSheet> {
    this.guard('score')
    const checked = validateScoreForm(form)
    const sheet = await this.client.score(this.case.case_id, checked)
    await this.refresh()
    return sheet
  }
}
