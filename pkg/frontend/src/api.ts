import type { ScenarioView, ServiceError, SessionSnapshot, ShiftRow } from './types'

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>

export class ServiceRequestError extends Error {
  readonly code: string
  readonly status: number

  constructor(status: number, body: ServiceError) {
    super(body.detail)
    this.code = body.error
    this.status = status
  }
}

/**
 * Thin typed client over the session service. A fetch implementation is
 * injected so tests can run against a mock without any transport.
 */
export class SessionApi {
  constructor(private base: string, private fetchFn: FetchLike = fetch) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(this.base + path, init)
    const body = await res.json()
    if (!res.ok) {
      throw new ServiceRequestError(res.status, body as ServiceError)
    }
    return body as T
  }

  getSnapshot(sessionId: string) {
    return this.request<SessionSnapshot>(`/sessions/${sessionId}`)
  }

  getScenario(sessionId: string, budget: number) {
    return this.request<ScenarioView>(`/sessions/${sessionId}/scenario?budget=${budget}`)
  }

  commit(sessionId: string, mesBudget: number) {
    return this.request<SessionSnapshot>(`/sessions/${sessionId}/commit`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ mes_budget: mesBudget }),
    })
  }

  veto(sessionId: string, projectId: string, decidedBy = '') {
    return this.request<SessionSnapshot>(`/sessions/${sessionId}/veto`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ project_id: projectId, decided_by: decidedBy }),
    })
  }

  adjust(sessionId: string, projectId: string, newCost: number) {
    return this.request<SessionSnapshot>(`/sessions/${sessionId}/adjust`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ project_id: projectId, new_cost: newCost }),
    })
  }

  getRtrReport(sessionId: string) {
    return this.request<{ statements: ShiftRow[] }>(`/sessions/${sessionId}/rtr/report`)
  }
}
