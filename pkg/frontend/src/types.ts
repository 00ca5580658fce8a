// JSON payload shapes of the service API. Field names mirror the API
// verbatim; the UI never derives domain numbers from these, it only
// renders them.

export interface FacilityConfig {
  facility_id: string;
  name: string;
  retention_months: number;
  emission_factor: number;
  timezone: string;
}

export interface ForecastBundle {
  facility_id: string;
  month: string;
  daily_occupancy: Record<string, number>;
  daily_kwh: Record<string, number>;
  monthly_kwh: number;
  generated_at: string;
}

export interface HistoryDay {
  actual_kwh: number | null;
  forecast_kwh: number | null;
  quality: string | null;
}

export interface HistoryPayload {
  facility_id: string;
  month: string;
  days: Record<string, HistoryDay>;
  monthly_actual_kwh: number | null;
  monthly_forecast_kwh: number | null;
  forecast_generated_at: string | null;
}

export interface WhatifRequest {
  forecast_kwh?: number;
  month?: string;
  rates: { green_rate: number; conventional_rate: number };
  ask_grid: number[];
}

export interface WhatifPoint {
  ask: number;
  total_cost: number;
  green_billed_kwh: number;
  conventional_billed_kwh: number;
  green_consumed_kwh: number;
  gp_utilization: number;
  wasted_green_kwh: number;
}

export interface WhatifResponse {
  consumption_kwh: number;
  points: WhatifPoint[];
}

export interface OffsetProject {
  name: string;
  unit_cost: number;
  min_share: number;
  enabled: boolean;
  annotations: string[];
}

export interface OffsetInstance {
  mode: "max_offset" | "min_cost";
  budget: number | null;
  target_offset: number | null;
  projects: OffsetProject[];
}

export interface OffsetPlan {
  allocations: Record<string, number>;
  total_offset: number;
  total_cost: number;
  feasible: boolean;
  violations: string[];
  emissions_liability_mtco2e?: number;
}

export interface JobRecord {
  job_id: string;
  kind: string;
  state: "queued" | "running" | "done" | "failed";
  detail: string;
}

export interface ApiError {
  status: number;
  error: string;
  detail: string;
  violations?: string[];
}
