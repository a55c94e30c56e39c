/** The console's only configuration knob is where the API lives. */

export interface ConsoleConfig {
  baseUrl: string
}

export const DEFAULT_BASE_URL = 'http://127.0.0.1:8000'

/** Normalize a base URL: default when blank, no trailing slash. */
export function resolveConfig(baseUrl?: string): ConsoleConfig {
  let url = (baseUrl ?? '').trim()
  if (url === '') {
    url = DEFAULT_BASE_URL
  }
  while (url.endsWith('/')) {
    url = url.slice(0, -1)
  }
  return { baseUrl: url }
}
