import { describe, expect, it } from 'vitest'

import { percent, scoreBadge, statusLabel } from '../src/format'
import {
  escapeHtml,
  renderApiDownBanner,
  renderCaseList,
  renderContextPanel,
  renderErrorToast,
  renderProbabilityChart,
  renderRawResponsePanel,
  renderReport,
  renderScorePanel,
  renderStepper,
} from '../src/render'
import { stepStates } from '../src/workflow'
import { CaseSummary, ScoreSheet } from '../src/types'
import { makeDetail } from './fixtures'

const SCORED: CaseSummary = {
  case_id: 'case-1',
  status: 'scored',
  label: 'Malignant',
  final: 3.2533,
  final_display: '3.25',
  created: '2026-01-01T00:00:00+00:00',
}

describe('formatting', () => {
  it('renders the score badge from the server display string', () => {
    expect(scoreBadge(SCORED)).toBe('3.25/5')
    expect(scoreBadge({ final_display: null })).toBe('')
  })

  it('labels statuses and percentages', () => {
    expect(statusLabel('classified')).toBe('Classified')
    expect(percent(0.905)).toBe('90.5%')
  })
})

describe('case list', () => {
  it('shows the empty-state prompt when there are no cases', () => {
    const html = renderCaseList([])
    expect(html).toContain('Create a case')
    expect(html).toContain('empty-state')
  })

  it('shows one row per case with status and score badges', () => {
    const unscored: CaseSummary = {
      case_id: 'case-2',
      status: 'created',
      label: null,
      final: null,
      final_display: null,
      created: null,
    }
    const html = renderCaseList([SCORED, unscored])
    expect(html).toContain('3.25/5')
    expect(html).toContain('status-scored')
    expect(html).toContain('data-case-id="case-2"')
    expect(html).toContain('Create a case')
  })

  it('escapes case fields', () => {
    const hostile = { ...SCORED, case_id: '<img onerror=x>' }
    expect(renderCaseList([hostile])).not.toContain('<img onerror=x>')
  })
})

describe('workflow widgets', () => {
  it('marks locked steps with disabled buttons', () => {
    const html = renderStepper(stepStates(makeDetail('created', false)))
    expect(html).toContain('data-action="upload"')
    expect(html).not.toContain('data-action="upload" disabled')
    expect(html).toContain('data-action="classify" disabled')
    expect(html).toContain('data-action="score" disabled')
  })

  it('renders one probability bar per class', () => {
    const detail = makeDetail('classified')
    const html = renderProbabilityChart(detail.opinion!, ['A', 'B', 'C', 'D', 'E'])
    expect(html.match(/prob-row/g)).toHaveLength(5)
    expect(html).toContain('width: 90.0%')
    expect(html).toContain('Malignant (90.0%)')
  })

  it('renders the three report sections under their headings', () => {
    const html = renderReport(makeDetail('reported').report!)
    expect(html).toContain('<h3>Preliminary Diagnosis</h3>')
    expect(html).toContain('<h3>Justification</h3>')
    expect(html).toContain('<h3>Recommended Follow-Up Examinations</h3>')
    expect(html).toContain('Highly suggestive of invasive cancer.')
  })

  it('shows stored context verbatim with placeholders for empty slots', () => {
    const html = renderContextPanel(makeDetail('created'))
    expect(html).toContain('Cough.')
    expect(html).toContain('<em>None provided</em>')
  })

  it('renders the score sheet fields and the final badge', () => {
    const sheet: ScoreSheet = {
      S_amateur: 11 / 3,
      S_expert: 3.5,
      meteor: 0.42,
      final: 3.2533,
      final_display: '3.25',
      reference_text: 'ref',
    }
    const html = renderScorePanel(sheet)
    expect(html).toContain('S_amateur')
    expect(html).toContain('3.6667')
    expect(html).toContain('S_expert')
    expect(html).toContain('METEOR')
    expect(html).toContain('0.4200')
    expect(html).toContain('3.25/5')
  })

  it('wraps a malformed model reply in a collapsible panel', () => {
    const html = renderRawResponsePanel('<b>not a report</b>')
    expect(html).toContain('<details')
    expect(html).toContain('Raw model response')
    expect(html).toContain('&lt;b&gt;not a report&lt;/b&gt;')
  })

  it('renders toasts and banners from error envelopes', () => {
    const toast = renderErrorToast({ code: 'conflict', message: 'too early', detail: null })
    expect(toast).toContain('data-code="conflict"')
    expect(toast).toContain('too early')
    expect(renderApiDownBanner('down')).toContain('data-action="retry"')
  })
})

describe('escaping', () => {
  it('escapes angle brackets, ampersands and quotes', () => {
    expect(escapeHtml('<a href="x">&</a>')).toBe(
      '&lt;a href=&quot;x&quot;&gt;&amp;&lt;/a&gt;',
    )
  })
})
