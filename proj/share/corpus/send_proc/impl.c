int send_proc(pid_t pid) {
    struct proc *proc;

    if (!is_pid_valid(pid))
        return -ESRCH;
    proc = get_proc(pid);
    if (proc->state != PROC_RUNNABLE)
        return -EINVAL;
    if (proc->ipc_from != 0 && proc->ipc_from != current)
        return -EACCES;

    proc->state = PROC_RUNNING;
    proc->ipc_from = 0;
    return 0;
}
