/** Wire types served by the backend JSON routes. */

export type ChartKind = "Bar" | "Line" | "Pie";

export interface ChartDataset {
  name: string;
  values: number[];
}

export interface ChartSeries {
  title: string;
  kind: ChartKind;
  unit: string;
  categories: string[];
  datasets: ChartDataset[];
}

export type Lane = "ToDo" | "InProgress" | "Done";

export interface Task {
  id: string;
  task_id: string;
  ws_id: string;
  sprint_id: string | null;
  name: string;
  description: string | null;
  item_type: string;
  priority: string;
  assignees: string[];
  planned_effort: number;
  status: Lane;
  completed_at: string | null;
}

export interface Workspace {
  id: string;
  org_id: string;
  name: string;
  process: "Scrum" | "Kanban";
  status: string;
  benefits: string;
  success_criteria: string;
  planned_cost: number;
  current_cost: number;
  planned_start: string;
  planned_end: string;
  board_version: number;
}

export interface Organization {
  id: string;
  name: string;
  activity_type: string;
  country: string;
}

export interface Sprint {
  id: string;
  ws_id: string;
  name: string;
  start: string;
  end: string;
  state: "Active" | "Closed";
  day_count: number;
}

export interface BacklogItem {
  item_id: string;
  name: string;
  item_type: string;
  priority: string;
  status: string;
  effort_estimate: number;
}

export interface AppNotification {
  id: string;
  kind: string;
  payload: Record<string, unknown>;
  read: boolean;
  created_at: string;
  actionable: boolean;
}

export interface SprintStats {
  sprint_id: string;
  name: string;
  state: string;
  open_issue_count: number;
  progression: number;
  solved_by_type: Record<string, number>;
  per_day_remaining: number[];
  per_day_actual: number[];
}

export interface MoveResult {
  task: Task;
  board_version: number;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  field: string | null;
}
