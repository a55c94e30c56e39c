/**
 * String-template renderers.  They are pure functions from API payloads to
 * HTML so the component tests can assert on markup without a browser; the
 * bootstrap in app.ts mounts the strings and wires events.
 */

import { confidenceText, percent, scoreBadge, statusLabel } from './format'
import { StepName, StepStates, STEPS } from './workflow'
import { CaseDetail, CaseSummary, ErrorEnvelope, Opinion, Report, ScoreSheet } from './types'

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
}

const STEP_TITLES: Record<StepName, string> = {
  upload: 'Upload',
  classify: 'Classify',
  context: 'Context',
  report: 'Report',
  grade: 'Grade',
  score: 'Score',
}

// ---------------------------------------------------------------------------
// List page
// ---------------------------------------------------------------------------

export function renderCaseList(cases: CaseSummary[]): string {
  if (cases.length === 0) {
    return '<div class="empty-state"><p>No cases yet.</p>' +
      '<button class="create-case" data-action="create">Create a case</button></div>'
  }
  const rows = cases
    .map(c => {
      const badge = scoreBadge(c)
      const scoreCell = badge === '' ? '&mdash;' : `<span class="badge score">${badge}</span>`
      return `<tr class="case-row" data-case-id="${escapeHtml(c.case_id)}">` +
        `<td>${escapeHtml(c.case_id)}</td>` +
        `<td><span class="badge status-${c.status}">${statusLabel(c.status)}</span></td>` +
        `<td>${c.label === null ? '&mdash;' : escapeHtml(c.label)}</td>` +
        `<td>${scoreCell}</td></tr>`
    })
    .join('')
  return '<table class="case-list"><thead><tr>' +
    '<th>Case</th><th>Status</th><th>Label</th><th>Final score</th>' +
    `</tr></thead><tbody>${rows}</tbody></table>` +
    '<button class="create-case" data-action="create">Create a case</button>'
}

export function renderApiDownBanner(message: string): string {
  return `<div class="banner error"><span>${escapeHtml(message)}</span>` +
    '<button data-action="retry">Retry</button></div>'
}

export function renderErrorToast(envelope: ErrorEnvelope): string {
  return `<div class="toast error" data-code="${escapeHtml(envelope.code)}">` +
    `${escapeHtml(envelope.message)}</div>`
}

// ---------------------------------------------------------------------------
// Workflow page
// ---------------------------------------------------------------------------

export function renderStepper(states: StepStates): string {
  const items = STEPS.map(name => {
    const state = states[name]
    const classes = ['step']
    if (state.done) classes.push('done')
    if (state.enabled) classes.push('enabled')
    else classes.push('locked')
    const disabled = state.enabled ? '' : ' disabled'
    return `<li class="${classes.join(' ')}" data-step="${name}">` +
      `<button data-action="${name}"${disabled}>${STEP_TITLES[name]}</button></li>`
  })
  return `<ol class="stepper">${items.join('')}</ol>`
}

export function renderProbabilityChart(opinion: Opinion, classNames: string[]): string {
  const bars = opinion.probs
    .map((p, i) => {
      const name = classNames[i] ?? `class ${i}`
      return `<div class="prob-row"><span class="prob-label">${escapeHtml(name)}</span>` +
        `<div class="prob-bar" style="width: ${(100 * p).toFixed(1)}%"></div>` +
        `<span class="prob-value">${percent(p)}</span></div>`
    })
    .join('')
  return `<div class="prob-chart" data-label="${escapeHtml(opinion.label)}">` +
    `<p class="prediction">${escapeHtml(confidenceText(opinion.label, opinion.confidence))}</p>` +
    `${bars}</div>`
}

export function renderContextPanel(detail: CaseDetail): string {
  const ctx = detail.context
  const row = (label: string, value: string) =>
    `<dt>${label}</dt><dd>${value === '' ? '<em>None provided</em>' : escapeHtml(value)}</dd>`
  return '<dl class="context">' +
    row('Chief Complaint', ctx.chief_complaint) +
    row('Physical Examination', ctx.physical_exam) +
    row('Additional Information', ctx.additional_info) +
    '</dl>'
}

export function renderReport(report: Report): string {
  const section = (heading: string, body: string) =>
    `<section><h3>${heading}</h3><p>${escapeHtml(body)}</p></section>`
  return '<article class="report">' +
    section('Preliminary Diagnosis', report.preliminary_diagnosis) +
    section('Justification', report.justification) +
    section('Recommended Follow-Up Examinations', report.follow_up) +
    `<footer>model ${escapeHtml(report.model_id)}, ${report.latency_ms} ms</footer>` +
    '</article>'
}

/** 422 from the report step: show the unparseable reply for human review. */
export function renderRawResponsePanel(rawText: string): string {
  return '<details class="raw-response"><summary>Raw model response</summary>' +
    `<pre>${escapeHtml(rawText)}</pre></details>`
}

export function renderScorePanel(sheet: ScoreSheet): string {
  return '<dl class="score-sheet">' +
    `<dt>S_amateur</dt><dd>${sheet.S_amateur.toFixed(4)}</dd>` +
    `<dt>S_expert</dt><dd>${sheet.S_expert.toFixed(4)}</dd>` +
    `<dt>METEOR</dt><dd>${sheet.meteor.toFixed(4)}</dd>` +
    `<dt>Final</dt><dd class="final">${sheet.final_display}/5</dd>` +
    '</dl>'
}
