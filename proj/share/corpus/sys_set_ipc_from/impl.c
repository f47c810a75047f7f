int sys_set_ipc_from(pid_t pid) {
    struct proc *proc;

    if (!is_pid_valid(pid) && pid != 0)
        return -ESRCH;

    proc = get_proc(current);
    proc->ipc_from = pid;
    return 0;
}
