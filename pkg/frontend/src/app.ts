/**
 * Browser bootstrap: mounts the list and workflow views and wires form
 * events to the controller.  All markup comes from render.ts; all state
 * transitions come from the server via WorkflowController.
 */

import { ApiError, CaseApiClient } from './client'
import { resolveConfig } from './config'
import {
  renderApiDownBanner,
  renderCaseList,
  renderContextPanel,
  renderErrorToast,
  renderProbabilityChart,
  renderRawResponsePanel,
  renderReport,
  renderScorePanel,
  renderStepper,
} from './render'
import { contextFromForm, WorkflowController } from './workflow'

export const CLASS_NAMES = ['Benign', 'Malignant', 'Gall.', 'COVID', 'Pneu.']

function field(form: HTMLElement, name: string): string {
  const el = form.querySelector<HTMLInputElement | HTMLTextAreaElement>(
    `[name="${name}"]`,
  )
  return el ? el.value : ''
}

export function mountConsole(root: HTMLElement, baseUrl?: string): void {
  const client = new CaseApiClient(resolveConfig(baseUrl))
  const controller = new WorkflowController(client)

  const toast = (html: string) => {
    const holder = document.createElement('div')
    holder.innerHTML = html
    root.appendChild(holder.firstElementChild as HTMLElement)
    setTimeout(() => root.querySelector('.toast')?.remove(), 4000)
  }

  const showError = (err: unknown) => {
    if (err instanceof ApiError) {
      if (err.status === 422) {
        const raw = (err.envelope.detail as { raw_text?: string })?.raw_text ?? ''
        root.insertAdjacentHTML('beforeend', renderRawResponsePanel(raw))
      }
      toast(renderErrorToast(err.envelope))
    } else {
      toast(renderErrorToast({ code: 'client', message: String(err), detail: null }))
    }
  }

  async function showList(): Promise<void> {
    try {
      const cases = await client.listCases()
      root.innerHTML = renderCaseList(cases)
    } catch (err) {
      root.innerHTML = renderApiDownBanner(
        'The case service is unreachable. Check that it is running.',
      )
      return
    }
    root.querySelector('[data-action="create"]')?.addEventListener('click', showCreateForm)
    for (const row of root.querySelectorAll<HTMLElement>('.case-row')) {
      row.addEventListener('click', () => {
        void showWorkflow(row.dataset.caseId ?? '')
      })
    }
  }

  function showCreateForm(): void {
    root.innerHTML =
      '<form class="create-form">' +
      '<label>Chief Complaint<textarea name="chief_complaint"></textarea></label>' +
      '<label>Physical Examination<textarea name="physical_exam"></textarea></label>' +
      '<label>Additional Information<textarea name="additional_info"></textarea></label>' +
      '<button type="submit">Create</button></form>'
    const form = root.querySelector('form') as HTMLFormElement
    form.addEventListener('submit', async event => {
      event.preventDefault()
      try {
        const ctx = contextFromForm(
          field(form, 'chief_complaint'),
          field(form, 'physical_exam'),
          field(form, 'additional_info'),
        )
        const detail = await controller.create(ctx)
        await showWorkflow(detail.case_id)
      } catch (err) {
        showError(err)
      }
    })
  }

  async function showWorkflow(caseId: string): Promise<void> {
    try {
      await controller.open(caseId)
    } catch (err) {
      showError(err)
      return
    }
    renderWorkflow()
  }

  function renderWorkflow(): void {
    const detail = controller.case
    const parts = [renderStepper(controller.steps), renderContextPanel(detail)]
    if (detail.video_ref) {
      parts.push(
        `<video class="preview" controls src="${client.url(
          `/api/cases/${detail.case_id}/video`,
        )}"></video>`,
      )
    }
    if (detail.opinion) {
      parts.push(renderProbabilityChart(detail.opinion, CLASS_NAMES))
    }
    if (detail.report) {
      parts.push(renderReport(detail.report))
    }
    if (detail.score) {
      parts.push(renderScorePanel(detail.score))
    }
    parts.push('<button data-action="back">Back to cases</button>')
    root.innerHTML = parts.join('')
    wireWorkflowActions()
  }

  function wireWorkflowActions(): void {
    const on = (action: string, handler: () => Promise<void> | void) => {
      root
        .querySelector(`[data-action="${action}"]`)
        ?.addEventListener('click', () => void handler())
    }
    on('back', showList)
    on('upload', () => pickFileAndUpload())
    on('classify', () => run(() => controller.classify()))
    on('report', () => run(() => controller.generateReport()))
    on('grade', () => promptGrade())
    on('score', () => promptScore())
  }

  async function run(action: () => Promise<unknown>): Promise<void> {
    try {
      await action()
      renderWorkflow()
    } catch (err) {
      showError(err)
    }
  }

  function pickFileAndUpload(): void {
    const input = document.createElement('input')
    input.type = 'file'
    input.addEventListener('change', async () => {
      const file = input.files?.[0]
      if (!file) return
      const data = await file.arrayBuffer()
      await run(() => controller.uploadVideo(data, file.name))
    })
    input.click()
  }

  function promptGrade(): void {
    const raterId = window.prompt('Rater id?') ?? ''
    const role = window.prompt("Role ('amateur' or 'expert')?") ?? ''
    const score = Number(window.prompt('Score (integer 1..5)?') ?? '')
    void run(() => controller.submitGrade({ raterId, role, score }))
  }

  function promptScore(): void {
    const reference = window.prompt('Reference diagnosis text?') ?? ''
    void run(() => controller.submitScore({ referenceText: reference }))
  }

  void showList()
}

declare global {
  interface Window {
    CASE_CONSOLE_BASE_URL?: string
  }
}

if (typeof document !== 'undefined' && document.getElementById('console-root')) {
  mountConsole(
    document.getElementById('console-root') as HTMLElement,
    window.CASE_CONSOLE_BASE_URL,
  )
}
