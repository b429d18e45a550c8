export { SessionApi, ServiceRequestError } from './api'
export type { FetchLike } from './api'
export * from './types'
export * from './viewModel'
export * from './sliderView'
export * from './vetoAdjustPanel'
export * from './spectrumView'
