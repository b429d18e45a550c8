import { SessionApi } from './api'
import type { ScenarioRow } from './types'
import { ViewModel, withBanner, withScenario } from './viewModel'

export const DEFAULT_STEP = 1000 // minor units per slider notch

export interface BarRow {
  projectId: string
  name: string
  votesBar: number
  costBar: number
  funded: boolean
}

/** Scenario rows to renderable bars; widths are the service numbers
 * normalized to the row maxima, nothing is recomputed. */
export function toBars(rows: ScenarioRow[]): BarRow[] {
  const maxVotes = Math.max(1, ...rows.map((r) => r.votes))
  const maxCost = Math.max(1, ...rows.map((r) => r.cost))
  return rows.map((r) => ({
    projectId: r.project_id,
    name: r.name,
    votesBar: r.votes / maxVotes,
    costBar: r.cost / maxCost,
    funded: r.funded,
  }))
}

export function fundedSet(vm: ViewModel): Set<string> {
  if (!vm.scenario) return new Set()
  return new Set(vm.scenario.rows.filter((r) => r.funded).map((r) => r.project_id))
}

/**
 * Budget slider controller. Each movement issues a scenario request
 * tagged with a monotone sequence number; responses apply through
 * withScenario, which drops anything superseded, so a rapid wiggle
 * always settles on the view for the final position.
 */
export class SliderController {
  private seq = 0
  private inflight = 0

  constructor(
    private api: SessionApi,
    private sessionId: string,
    private update: (fn: (vm: ViewModel) => ViewModel) => void,
    readonly step: number = DEFAULT_STEP,
  ) {}

  get pending(): number {
    return this.inflight
  }

  snapToStep(raw: number): number {
    return Math.round(raw / this.step) * this.step
  }

  async moveTo(budget: number): Promise<void> {
    const mySeq = ++this.seq
    this.inflight++
    try {
      const scenario = await this.api.getScenario(this.sessionId, budget)
      this.update((vm) => withScenario(vm, scenario, mySeq))
    } catch (err) {
      // keep the last good view; surface the failure in the banner
      const message = err instanceof Error ? err.message : String(err)
      this.update((vm) => withBanner(vm, `service unreachable: ${message}`))
    } finally {
      this.inflight--
    }
  }
}
