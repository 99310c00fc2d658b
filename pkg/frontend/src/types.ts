// Client-side mirrors of the API JSON bodies.

export interface SessionUser {
  id: string;
  username: string;
  level: number;
  home_unit_id: string;
  active: boolean;
}

export interface LoginResponse {
  token: string;
  expires_at: string;
  user: SessionUser;
}

export interface ScopedPermission {
  action: string;
  scope_unit_id: string;
  scope_unit_name: string;
}

export interface PermissionsResponse {
  user_id: string;
  level: number;
  permissions: ScopedPermission[];
}

export interface OrgUnit {
  id: string;
  name: string;
  kind: string;
  parent_id: string | null;
}

export interface AssetDoc {
  id: string;
  serial_number: string;
  type_id: string;
  owner_unit_id: string;
  state: string;
  location_id: string | null;
  holder_user_id: string | null;
  group_id: string | null;
  properties: Record<string, string>;
}

export interface AssetRow {
  id: string;
  serial_number: string;
  type: string;
  state: string;
  owner_unit_id: string;
  building: string;
  floor: string;
  room: string;
  holder_user_id: string;
  properties: Record<string, string>;
}

export interface SearchResponse {
  total: number;
  offset: number;
  limit: number;
  items: AssetRow[];
}

export interface RequestLineDoc {
  asset_serial: string | null;
  location_id: string | null;
  note: string;
}

export interface RouteSlotDoc {
  required_level: number;
  scope_unit_id: string;
}

export interface ApprovalDoc {
  approver_id: string;
  slot_index: number;
  decision: string;
  at: string;
  note: string;
}

export interface RequestDoc {
  id: string;
  requester_id: string;
  form: string;
  kind: string;
  text: string;
  lines: RequestLineDoc[];
  route: RouteSlotDoc[];
  approvals: ApprovalDoc[];
  status: string;
  created_at: string;
  resolved_at: string | null;
}

export interface ReportTable {
  kind: string;
  columns: string[];
  rows: Record<string, string | number>[];
}

export interface GrantDoc {
  id: string;
  grantor_id: string;
  grantee_id: string;
  permissions: string[];
  created_at: string;
  revoked_at: string | null;
}

export interface UserDoc {
  id: string;
  username: string;
  level: number;
  home_unit_id: string;
  active: boolean;
}
