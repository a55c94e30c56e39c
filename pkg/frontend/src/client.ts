/**
 * Thin typed wrapper over fetch for the case service.  Non-2xx responses
 * become ApiError instances carrying the server's error envelope so the
 * UI can map them to toasts or panels without inspecting status codes in
 * more than one place.
 */

import { ConsoleConfig } from './config'
import {
  CaseDetail,
  CaseSummary,
  ClinicalContext,
  ErrorEnvelope,
  GradeEntry,
  HealthInfo,
  Opinion,
  Report,
  ScoreSheet,
  UploadResult,
} from './types'

export class ApiError extends Error {
  readonly status: number
  readonly envelope: ErrorEnvelope

  constructor(status: number, envelope: ErrorEnvelope) {
    super(envelope.message)
    this.name = 'ApiError'
    this.status = status
    this.envelope = envelope
  }

  get code(): string {
    return this.envelope.code
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>

async function toEnvelope(response: Response): Promise<ErrorEnvelope> {
  try {
    const body = await response.json()
    if (body && typeof body.code === 'string' && typeof body.message === 'string') {
      return body as ErrorEnvelope
    }
    return { code: 'unknown', message: JSON.stringify(body), detail: null }
  } catch {
    return { code: 'unknown', message: `HTTP ${response.status}`, detail: null }
  }
}

export class CaseApiClient {
  private readonly baseUrl: string
  private readonly fetchImpl: FetchLike

  constructor(config: ConsoleConfig, fetchImpl?: FetchLike) {
    this.baseUrl = config.baseUrl
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init))
  }

  url(path: string): string {
    return this.baseUrl + path
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.url(path), init)
    if (!response.ok) {
      throw new ApiError(response.status, await toEnvelope(response))
    }
    return (await response.json()) as T
  }

  private postJson<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    })
  }

  health(): Promise<HealthInfo> {
    return this.request<HealthInfo>('/api/health')
  }

  listCases(): Promise<CaseSummary[]> {
    return this.request<{ cases: CaseSummary[] }>('/api/cases').then(r => r.cases)
  }

  getCase(caseId: string): Promise<CaseDetail> {
    return this.request<CaseDetail>(`/api/cases/${caseId}`)
  }

  createCase(context: ClinicalContext): Promise<string> {
    return this.postJson<{ case_id: string }>('/api/cases', { context }).then(
      r => r.case_id,
    )
  }

  uploadVideo(
    caseId: string,
    data: ArrayBuffer | Uint8Array,
    filename = '',
  ): Promise<UploadResult> {
    const query = filename ? `?filename=${encodeURIComponent(filename)}` : ''
    return this.request<UploadResult>(`/api/cases/${caseId}/video${query}`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/octet-stream' },
      body: data as BodyInit,
    })
  }

  classify(caseId: string): Promise<Opinion> {
    return this.request<Opinion>(`/api/cases/${caseId}/classify`, {
      method: 'POST',
    })
  }

  generateReport(caseId: string): Promise<Report> {
    return this.request<Report>(`/api/cases/${caseId}/report`, { method: 'POST' })
  }

  submitGrade(caseId: string, grade: GradeEntry): Promise<GradeEntry[]> {
    return this.postJson<{ grades: GradeEntry[] }>(
      `/api/cases/${caseId}/grades`,
      grade,
    ).then(r => r.grades)
  }

  /** Either a reference text (server computes METEOR) or an explicit value. */
  score(
    caseId: string,
    request: { referenceText?: string; meteor?: number },
  ): Promise<ScoreSheet> {
    const body: Record<string, unknown> = {}
    if (request.referenceText !== undefined) {
      body.reference_text = request.referenceText
    }
    if (request.meteor !== undefined) {
      body.meteor = request.meteor
    }
    return this.postJson<ScoreSheet>(`/api/cases/${caseId}/score`, body)
  }
}
