/**
 * Thin HTTP client for the investigation service.
 *
 * The transport is injectable so tests can record requests and script
 * responses without a network. Error bodies follow the service contract
 * {"error": {"code", "message"}}.
 */

export interface TransportResponse {
  status: number;
  body: unknown;
}

export interface Transport {
  request(method: string, path: string, body?: unknown): Promise<TransportResponse>;
}

export class ApiCallError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
  ) {
    super(message);
    this.name = "ApiCallError";
  }
}

export interface SessionSummary {
  session_id: string;
  threshold: number;
  playlist_length: number;
  cursor: number;
  status: string;
  mode: string;
  additions: number;
  focus: string | null;
  scene?: unknown;
  exhausted?: boolean;
  playlist?: string[];
}

export class FetchTransport implements Transport {
  constructor(private readonly base = "") {}

  async request(method: string, path: string, body?: unknown): Promise<TransportResponse> {
    const response = await fetch(this.base + path, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    let parsed: unknown = null;
    try {
      parsed = await response.json();
    } catch {
      parsed = null;
    }
    return { status: response.status, body: parsed };
  }
}

function unwrap(response: TransportResponse): unknown {
  if (response.status >= 200 && response.status < 300) return response.body;
  const body = response.body as { error?: { code?: string; message?: string } } | null;
  const code = body?.error?.code ?? "internal";
  const message = body?.error?.message ?? `request failed with status ${response.status}`;
  throw new ApiCallError(code, message, response.status);
}

export class ServiceClient {
  constructor(private readonly transport: Transport) {}

  private async call(method: string, path: string, body?: unknown): Promise<unknown> {
    return unwrap(await this.transport.request(method, path, body));
  }

  async createSession(threshold: number, additionCap?: number): Promise<SessionSummary> {
    const body: Record<string, unknown> = { threshold };
    if (additionCap !== undefined) body["addition_cap"] = additionCap;
    return (await this.call("POST", "/sessions", body)) as SessionSummary;
  }

  async start(id: string): Promise<SessionSummary> {
    return (await this.call("POST", `/sessions/${id}/start`)) as SessionSummary;
  }

  async pause(id: string): Promise<SessionSummary> {
    return (await this.call("POST", `/sessions/${id}/pause`)) as SessionSummary;
  }

  async resume(id: string): Promise<SessionSummary> {
    return (await this.call("POST", `/sessions/${id}/resume`)) as SessionSummary;
  }

  async stop(id: string): Promise<SessionSummary> {
    return (await this.call("POST", `/sessions/${id}/stop`)) as SessionSummary;
  }

  async next(id: string): Promise<SessionSummary> {
    return (await this.call("POST", `/sessions/${id}/next`)) as SessionSummary;
  }

  async select(id: string, node: string): Promise<SessionSummary> {
    return (await this.call("POST", `/sessions/${id}/select`, { node })) as SessionSummary;
  }

  async setMode(id: string, mode: string): Promise<SessionSummary> {
    return (await this.call("POST", `/sessions/${id}/mode`, { mode })) as SessionSummary;
  }

  async setThreshold(id: string, threshold: number): Promise<SessionSummary> {
    return (await this.call("POST", `/sessions/${id}/threshold`, { threshold })) as SessionSummary;
  }

  async scene(id: string): Promise<unknown> {
    return this.call("GET", `/sessions/${id}/scene`);
  }

  async summary(id: string): Promise<SessionSummary> {
    return (await this.call("GET", `/sessions/${id}`)) as SessionSummary;
  }
}
