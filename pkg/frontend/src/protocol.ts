/**
 * WebSocket protocol client: request/response correlation plus change events.
 *
 * The socket is injected as a factory so tests can use fakes and the e2e can
 * use the `ws` package; in the browser it wraps the native WebSocket.
 */

export interface ProtocolErrorBody {
  code: string
  category: string
  message: string
}

export class ProtocolError extends Error {
  code: string
  category: string

  constructor(body: ProtocolErrorBody) {
    super(body.message)
    this.code = body.code
    this.category = body.category
  }
}

export interface ProtocolEvent {
  type: 'event'
  event: string
  [key: string]: unknown
}

/** Structural subset shared by browser WebSocket and the `ws` package. */
export interface SocketLike {
  send(data: string): void
  close(): void
  addEventListener(type: 'open', listener: () => void): void
  addEventListener(type: 'close', listener: () => void): void
  addEventListener(type: 'error', listener: (err: unknown) => void): void
  addEventListener(type: 'message', listener: (ev: { data: unknown }) => void): void
}

export type SocketFactory = () => SocketLike

interface Pending {
  resolve: (result: any) => void
  reject: (err: Error) => void
}

export class LinkClient {
  private socket: SocketLike | null = null
  private pending = new Map<string, Pending>()
  private seq = 0
  private eventListeners = new Set<(ev: ProtocolEvent) => void>()
  private statusListeners = new Set<(connected: boolean) => void>()
  private topics: string[] = []
  private editorProject: string | null = null
  private reconnectDelayMs: number | null = null
  private closedByUser = false

  constructor(private makeSocket: SocketFactory) {}

  /** Reconnect automatically after unexpected closes, re-subscribing topics. */
  enableReconnect(delayMs: number): void {
    this.reconnectDelayMs = delayMs
  }

  onEvent(listener: (ev: ProtocolEvent) => void): () => void {
    this.eventListeners.add(listener)
    return () => this.eventListeners.delete(listener)
  }

  onStatus(listener: (connected: boolean) => void): () => void {
    this.statusListeners.add(listener)
    return () => this.statusListeners.delete(listener)
  }

  connect(): Promise<void> {
    this.closedByUser = false
    return new Promise((resolve, reject) => {
      const socket = this.makeSocket()
      this.socket = socket
      let opened = false
      socket.addEventListener('open', () => {
        opened = true
        this.statusListeners.forEach((l) => l(true))
        void this.resubscribe()
        resolve()
      })
      socket.addEventListener('error', (err: unknown) => {
        if (!opened) reject(err instanceof Error ? err : new Error(String(err)))
      })
      socket.addEventListener('message', (ev) => this.dispatch(ev.data))
      socket.addEventListener('close', () => {
        this.socket = null
        this.failAllPending(new Error('connection closed'))
        this.statusListeners.forEach((l) => l(false))
        if (!this.closedByUser && this.reconnectDelayMs !== null) {
          setTimeout(() => {
            this.connect().catch(() => undefined)
          }, this.reconnectDelayMs)
        }
      })
    })
  }

  close(): void {
    this.closedByUser = true
    this.socket?.close()
    this.socket = null
  }

  private dispatch(raw: unknown): void {
    const text = typeof raw === 'string' ? raw : String(raw)
    let message: any
    try {
      message = JSON.parse(text)
    } catch {
      return
    }
    if (message.type === 'event') {
      this.eventListeners.forEach((l) => l(message as ProtocolEvent))
      return
    }
    if (message.type === 'response') {
      const pending = this.pending.get(message.request_id)
      if (!pending) return
      this.pending.delete(message.request_id)
      if (message.ok) pending.resolve(message.result)
      else pending.reject(new ProtocolError(message.error as ProtocolErrorBody))
    }
  }

  private failAllPending(err: Error): void {
    for (const pending of this.pending.values()) pending.reject(err)
    this.pending.clear()
  }

  request<T = any>(type: string, payload: Record<string, unknown> = {}): Promise<T> {
    const socket = this.socket
    if (!socket) return Promise.reject(new Error('not connected'))
    const requestId = `w${++this.seq}`
    const message = JSON.stringify({ type, request_id: requestId, ...payload })
    return new Promise<T>((resolve, reject) => {
      this.pending.set(requestId, { resolve, reject })
      try {
        socket.send(message)
      } catch (err) {
        this.pending.delete(requestId)
        reject(err instanceof Error ? err : new Error(String(err)))
      }
    })
  }

  async subscribe(topics: string[]): Promise<void> {
    this.topics = [...topics]
    await this.request('subscribe', { topics })
  }

  async registerEditor(project: string): Promise<void> {
    this.editorProject = project
    await this.request('register_editor', { project })
  }

  private async resubscribe(): Promise<void> {
    try {
      if (this.topics.length) await this.request('subscribe', { topics: this.topics })
      if (this.editorProject) await this.request('register_editor', { project: this.editorProject })
    } catch {
      // next reconnect retries
    }
  }
}

export function browserSocketFactory(url: string): SocketFactory {
  return () => new WebSocket(url) as unknown as SocketLike
}

export function defaultWsUrl(location: { protocol: string; host: string }): string {
  const scheme = location.protocol === 'https:' ? 'wss' : 'ws'
  return `${scheme}://${location.host}/ws`
}
