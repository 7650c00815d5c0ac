// Wire types for the kernel's line protocol: one JSON object per line.
// Requests carry a client id; responses echo it; events have no id.

export interface KernelRequest {
  id: number;
  method: string;
  params?: Record<string, unknown>;
}

export interface KernelErrorShape {
  code: number;
  message: string;
}

export interface KernelResponse {
  id: number | null;
  result?: unknown;
  error?: KernelErrorShape;
}

export interface ValuePayload {
  kind: string;
  value: string;
  objectId?: number;
  completed?: boolean;
  failedAssertions?: number;
  paused?: boolean;
  sessionId?: number;
}

export interface ReasonPayload {
  kind: string;
  selector?: string;
  message?: string;
  receiver?: ValuePayload;
  args?: ValuePayload[];
  expected?: ValuePayload;
  actual?: ValuePayload;
  value?: ValuePayload;
  objectId?: number;
  sendPath?: number[];
  frameId?: number;
}

export interface FrameRow {
  frameId: number;
  kind: "method" | "block" | "top" | "pending";
  className: string | null;
  selector: string;
  line: number;
  pc: number[];
  receiver: string;
  receiverId: number | null;
  args: string[];
  temps: Record<string, string>;
}

export interface PausedEvent {
  event: "paused";
  sessionId: number;
  reason: ReasonPayload;
  topFrame: FrameRow | null;
}

export interface DeprecationEvent {
  event: "deprecation";
  selector: string;
  caller: string;
  message: string;
  rewritten: boolean;
}

export type KernelEvent =
  | PausedEvent
  | DeprecationEvent
  | { event: string; [key: string]: unknown };

export interface ClassRow {
  name: string;
  superName: string | null;
  fields: string[];
  selectors: string[];
  builtin: boolean;
}

export interface ViewRow {
  label: string;
  printString: string;
  objectId: number | null;
}

export interface ViewDescriptor {
  viewId: number;
  title: string;
  order: number;
  kind: "fields" | "table" | "text" | null;
  content: ViewRow[] | string | null;
}

export interface InspectionReport {
  objectId: number;
  className: string;
  printString: string;
  views: ViewDescriptor[];
}

export interface ChangeRecordRow {
  seq: number;
  kind: string;
  className: string;
  selector: string | null;
  beforeSource: string | null;
  afterSource: string | null;
  origin: string;
}

export interface TestResultRow {
  className: string;
  selector: string;
  outcome: "pass" | "fail" | "error";
  sessionId: number | null;
  durationMs: number;
}

export interface StepCommandRow {
  name: string;
  spec: { kind: string; value: string | number };
}

export type DecodedLine =
  | { type: "response"; response: KernelResponse }
  | { type: "event"; event: KernelEvent };

export function encodeRequest(request: KernelRequest): string {
  return JSON.stringify(request);
}

export function decodeLine(line: string): DecodedLine {
  const parsed = JSON.parse(line) as Record<string, unknown>;
  if (typeof parsed.event === "string") {
    return { type: "event", event: parsed as unknown as KernelEvent };
  }
  return { type: "response", response: parsed as unknown as KernelResponse };
}
