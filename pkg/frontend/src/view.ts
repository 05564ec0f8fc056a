import { ApiClient, ApiError, ConflictError } from "./client";
import type { SessionSnapshot } from "./types";

/** One edit the user asked for; the revision is attached at submit time. */
export interface MutationRequest {
  command: string;
  args: Record<string, unknown>;
  actor: string;
}

/**
 * Everything a session page renders. Values come from the API snapshot;
 * the view never computes risk levels on its own.
 */
export interface SessionViewState {
  sessionId: string;
  session: SessionSnapshot | null;
  revision: number;
  /** Edits waiting for connectivity, oldest first. */
  pending: MutationRequest[];
  offline: boolean;
  focusedAspect: string | null;
  /** Server error text to show inline, verbatim. */
  messages: string[];
}

export function emptyView(sessionId: string): SessionViewState {
  return {
    sessionId,
    session: null,
    revision: 0,
    pending: [],
    offline: false,
    focusedAspect: null,
    messages: [],
  };
}

export async function loadView(
  client: ApiClient,
  sessionId: string,
): Promise<SessionViewState> {
  const doc = await client.getSession(sessionId);
  return {
    ...emptyView(sessionId),
    session: doc.session,
    revision: doc.session.revision,
  };
}

function accepted(
  view: SessionViewState,
  session: SessionSnapshot,
): SessionViewState {
  return {
    ...view,
    session,
    revision: session.revision,
    offline: false,
    messages: [],
  };
}

function isNetworkFailure(error: unknown): boolean {
  return !(error instanceof ApiError);
}

/**
 * Submit one edit, absorbing the failure modes the user should not have
 * to think about:
 *
 * - stale revision: refetch the snapshot and replay the edit once;
 * - server rejection: keep the state, surface the server's text verbatim;
 * - network failure: queue the edit and mark the view offline.
 *
 * The edit is never silently dropped.
 */
export async function submitWithRetry(
  client: ApiClient,
  view: SessionViewState,
  mutation: MutationRequest,
): Promise<SessionViewState> {
  let revision = view.revision;
  for (let attempt = 0; attempt < 2; attempt += 1) {
    try {
      const response = await client.mutate(view.sessionId, {
        expected_revision: revision,
        command: mutation.command,
        args: mutation.args,
        actor: mutation.actor,
      });
      return accepted(view, response.session);
    } catch (error) {
      if (error instanceof ConflictError && attempt === 0) {
        const doc = await client.getSession(view.sessionId);
        view = { ...view, session: doc.session, revision: doc.session.revision };
        revision = doc.session.revision;
        continue;
      }
      if (error instanceof ConflictError) {
        // two conflicts in a row: someone is editing alongside us
        return {
          ...view,
          messages: [
            `${error.detail} Your edit was not applied; review the refreshed session and resubmit.`,
          ],
        };
      }
      if (error instanceof ApiError) {
        return { ...view, messages: [error.detail] };
      }
      if (isNetworkFailure(error)) {
        return {
          ...view,
          pending: [...view.pending, mutation],
          offline: true,
        };
      }
      throw error;
    }
  }
  throw new Error("unreachable: submit loop exits via return or throw");
}

/**
 * Replay queued edits in order once connectivity is back. Stops at the
 * first edit that fails again so nothing is lost or reordered.
 */
export async function flushPending(
  client: ApiClient,
  view: SessionViewState,
): Promise<SessionViewState> {
  let current: SessionViewState = { ...view, pending: [...view.pending] };
  while (current.pending.length > 0) {
    const [next, ...rest] = current.pending;
    const result = await submitWithRetry(
      client,
      { ...current, pending: [] },
      next,
    );
    if (result.pending.length > 0 || result.messages.length > 0) {
      // still offline, or the server rejected it; keep the rest queued
      return {
        ...result,
        pending: [...result.pending, ...rest],
      };
    }
    current = { ...result, pending: rest };
  }
  return current;
}
