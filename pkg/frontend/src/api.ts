/** Thin fetch client for the workbench API. The base URL defaults to the
 * serving origin so the built UI works behind `cdw serve --ui-dir`. */

import type {
  ContrastivePayload,
  CounterfactualPayload,
  DatasetDetail,
  DatasetSummary,
  DiagnosePayload,
  ModelSummary,
  ResponseEntry,
} from "./types.js";

declare global {
  interface Window {
    CDW_API_BASE?: string;
  }
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private base: string = (typeof window !== "undefined" && window.CDW_API_BASE) || "",
    private fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(`${this.base}/api${path}`, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    const body = await resp.json();
    if (!resp.ok) {
      throw new ApiError(
        resp.status,
        (body && body.code) || "Error",
        (body && body.message) || `request failed with ${resp.status}`,
      );
    }
    return body as T;
  }

  listDatasets() {
    return this.request<{ datasets: DatasetSummary[] }>("/datasets");
  }

  getDataset(id: string) {
    return this.request<DatasetDetail>(`/datasets/${id}`);
  }

  uploadDataset(responsesCsv: string, qmatrixCsv: string, itemsCsv?: string) {
    return this.request<{ dataset_id: string }>("/datasets", {
      method: "POST",
      body: JSON.stringify({
        responses_csv: responsesCsv,
        qmatrix_csv: qmatrixCsv,
        items_csv: itemsCsv ?? null,
      }),
    });
  }

  listModels() {
    return this.request<{ models: ModelSummary[] }>("/models");
  }

  trainModel(datasetId: string, overrides: Record<string, unknown> = {}) {
    return this.request<{ model_id: string; train_report: unknown }>("/models", {
      method: "POST",
      body: JSON.stringify({ dataset_id: datasetId, ...overrides }),
    });
  }

  studentResponses(datasetId: string, studentId: string) {
    return this.request<{ student_id: string; responses: ResponseEntry[] }>(
      `/datasets/${datasetId}/students/${encodeURIComponent(studentId)}`,
    );
  }

  analytics<T>(modelId: string, view: string) {
    return this.request<T>(`/models/${modelId}/analytics/${view}`);
  }

  diagnose(modelId: string, responses: ResponseEntry[]) {
    return this.request<DiagnosePayload>(`/models/${modelId}/diagnose`, {
      method: "POST",
      body: JSON.stringify({
        responses: responses.map((r) => ({ item_id: r.item_id, correct: r.correct })),
      }),
    });
  }

  contrastive(modelId: string, responses: ResponseEntry[], flipItems: string[]) {
    return this.request<ContrastivePayload>(
      `/models/${modelId}/explain/contrastive`,
      {
        method: "POST",
        body: JSON.stringify({
          responses: responses.map((r) => ({ item_id: r.item_id, correct: r.correct })),
          flip_items: flipItems,
        }),
      },
    );
  }

  counterfactual(
    modelId: string,
    responses: ResponseEntry[],
    overrides: Record<string, number>,
  ) {
    return this.request<CounterfactualPayload>(
      `/models/${modelId}/explain/counterfactual`,
      {
        method: "POST",
        body: JSON.stringify({
          base: {
            responses: responses.map((r) => ({
              item_id: r.item_id,
              correct: r.correct,
            })),
          },
          overrides,
        }),
      },
    );
  }
}
