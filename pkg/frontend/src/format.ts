/** Small display helpers shared by the list and workflow pages. */

import { CaseStatus, CaseSummary, ScoreSheet } from './types'

const STATUS_LABELS: Record<CaseStatus, string> = {
  created: 'Created',
  classified: 'Classified',
  reported: 'Reported',
  graded: 'Graded',
  scored: 'Scored',
}

export function statusLabel(status: CaseStatus): string {
  return STATUS_LABELS[status]
}

/** "3.25/5" style badge; empty string until the case is scored. */
export function scoreBadge(summary: Pick<CaseSummary, 'final_display'>): string {
  return summary.final_display === null || summary.final_display === undefined
    ? ''
    : `${summary.final_display}/5`
}

export function finalScoreText(sheet: ScoreSheet): string {
  return `${sheet.final_display}/5`
}

export function percent(fraction: number): string {
  return `${(100 * fraction).toFixed(1)}%`
}

export function confidenceText(label: string, confidence: number): string {
  return `${label} (${percent(confidence)})`
}
