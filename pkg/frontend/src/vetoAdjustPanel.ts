import { ServiceRequestError, SessionApi } from './api'
import type { SessionSnapshot } from './types'
import { ViewModel, withBanner, withSnapshot } from './viewModel'

export interface PanelRow {
  projectId: string
  name: string
  cost: number
  originalCost: number
  /** money moved to the deliberation track by trimming this project */
  freed: number
  struck: boolean
}

/** Rows for the frozen-project table, vetoed projects struck through. */
export function panelRows(snapshot: SessionSnapshot): PanelRow[] {
  const rows: PanelRow[] = snapshot.frozen.map((f) => ({
    projectId: f.project_id,
    name: f.name,
    cost: f.cost,
    originalCost: f.original_cost,
    freed: f.original_cost - f.cost,
    struck: false,
  }))
  for (const v of snapshot.vetoed) {
    rows.push({
      projectId: v.project_id,
      name: v.project_id,
      cost: 0,
      originalCost: v.cost,
      freed: v.cost,
      struck: true,
    })
  }
  return rows
}

export interface LedgerLine {
  label: string
  amount: number
}

export function ledgerLines(snapshot: SessionSnapshot): LedgerLine[] {
  const l = snapshot.ledger
  return [
    { label: 'total budget', amount: l.total_budget },
    { label: 'committed to allocation', amount: l.committed_mes_budget },
    { label: 'initial remainder', amount: l.initial_remainder },
    { label: 'freed by veto/trim', amount: l.freed_total },
    { label: 'deliberation remainder', amount: l.deliberation_remainder },
  ]
}

export class VetoAdjustController {
  /** detail text of the last rejected action, surfaced verbatim */
  lastError: string | null = null

  constructor(
    private api: SessionApi,
    private sessionId: string,
    private update: (fn: (vm: ViewModel) => ViewModel) => void,
  ) {}

  async veto(projectId: string, decidedBy = ''): Promise<boolean> {
    return this.act(() => this.api.veto(this.sessionId, projectId, decidedBy))
  }

  async adjust(projectId: string, newCost: number): Promise<boolean> {
    return this.act(() => this.api.adjust(this.sessionId, projectId, newCost))
  }

  private async act(call: () => Promise<SessionSnapshot>): Promise<boolean> {
    try {
      const snapshot = await call()
      this.lastError = null
      this.update((vm) => withSnapshot(vm, snapshot))
      return true
    } catch (err) {
      if (err instanceof ServiceRequestError) {
        this.lastError = err.message
        return false
      }
      const message = err instanceof Error ? err.message : String(err)
      this.update((vm) => withBanner(vm, `service unreachable: ${message}`))
      return false
    }
  }
}
